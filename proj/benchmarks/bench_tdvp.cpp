#include <benchmark/benchmark.h>

#include "tjm/mpo.hpp"
#include "tjm/mps.hpp"
#include "tjm/tdvp.hpp"

namespace {

void BM_tdvp_dynamic_step(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const tjm::MpOperator h = tjm::MpOperator::tfi(n, 1.0, 0.5);
  tjm::MpsState psi = tjm::MpsState::from_product_state(std::vector<int>(n, 0));
  // grow bonds to the cap first so the steady-state cost is measured
  for (int i = 0; i < 10; ++i) tjm::dynamic_step(psi, h, 0.01, 4, 1e-10);
  for (auto _ : state) {
    tjm::dynamic_step(psi, h, 0.01, 4, 1e-10);
    benchmark::DoNotOptimize(psi.site(0).data().data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}
BENCHMARK(BM_tdvp_dynamic_step)->Arg(5)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
