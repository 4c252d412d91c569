#include <benchmark/benchmark.h>

#include "tjm/config.hpp"
#include "tjm/trajectory.hpp"

namespace {

void BM_trajectory_step_throughput(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  tjm::SimConfig cfg;
  cfg.n_sites = n;
  cfg.dt = 1e-3;
  cfg.n_steps = 50;
  cfg.sample_stride = 50;
  cfg.noise = {{tjm::ChannelKind::Dephasing,
                tjm::RateSchedule{tjm::RateSchedule::Kind::DampedOscillatory, 8.24, 12.0,
                                  7.5, 0.25}}};
  const tjm::SimContext ctx = tjm::make_context(cfg);
  std::uint32_t index = 0;
  for (auto _ : state) {
    auto samples = tjm::run_trajectory(ctx, 42, index++);
    benchmark::DoNotOptimize(samples.mu.data());
  }
  state.SetItemsProcessed(state.iterations() * cfg.n_steps);
}
BENCHMARK(BM_trajectory_step_throughput)->Arg(2)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
