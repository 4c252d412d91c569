#include <benchmark/benchmark.h>

#include "tjm/linalg.hpp"
#include "tjm/rng.hpp"
#include "tjm/tensor.hpp"

namespace {

tjm::DenseTensor random_tensor(std::vector<std::int64_t> shape, tjm::RandomStream& rng) {
  tjm::DenseTensor t(std::move(shape));
  for (auto& v : t.data()) {
    v = tjm::Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  }
  return t;
}

void BM_contract_mps_transfer(benchmark::State& state) {
  const std::int64_t chi = state.range(0);
  tjm::RandomStream rng(1, 0);
  const auto env = random_tensor({chi, 3, chi}, rng);
  const auto site = random_tensor({chi, 2, chi}, rng);
  for (auto _ : state) {
    auto t = tjm::contract(env, site, {{2, 0}});
    benchmark::DoNotOptimize(t.data().data());
  }
}
BENCHMARK(BM_contract_mps_transfer)->Arg(4)->Arg(16)->Arg(64);

void BM_svd_truncate(benchmark::State& state) {
  const std::int64_t d = state.range(0);
  tjm::RandomStream rng(2, 0);
  const auto m = random_tensor({d, d}, rng);
  for (auto _ : state) {
    auto s = tjm::svd_truncate(m, 1, d / 2, 1e-10);
    benchmark::DoNotOptimize(s.singular_values.data());
  }
}
BENCHMARK(BM_svd_truncate)->Arg(8)->Arg(32);

void BM_expm_apply_small_norm(benchmark::State& state) {
  const std::int64_t d = state.range(0);
  tjm::RandomStream rng(3, 0);
  auto h = random_tensor({d, d}, rng);
  for (std::int64_t i = 0; i < d; ++i) {
    for (std::int64_t j = 0; j <= i; ++j) {
      const auto avg = 0.5 * (h.at({i, j}) + std::conj(h.at({j, i})));
      h.at({i, j}) = avg;
      h.at({j, i}) = std::conj(avg);
    }
  }
  const auto v = random_tensor({d}, rng);
  for (auto _ : state) {
    auto w = tjm::expm_apply(h, v, tjm::Complex(0.0, -5e-4));
    benchmark::DoNotOptimize(w.data().data());
  }
}
BENCHMARK(BM_expm_apply_small_norm)->Arg(16)->Arg(32)->Arg(64);

}  // namespace

BENCHMARK_MAIN();
