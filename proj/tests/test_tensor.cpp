#include <doctest.h>

#include "test_support.hpp"
#include "tjm/linalg.hpp"
#include "tjm/tensor.hpp"

using namespace tjm;
using test::max_abs_diff;
using test::naive_contract;
using test::random_tensor;

TEST_CASE("contract: identity and bit flip on a basis vector") {
  const DenseTensor id = DenseTensor::identity(2);
  const DenseTensor x = DenseTensor::matrix2(0, 1, 1, 0);
  const DenseTensor e0({2}, {1.0, 0.0});

  const DenseTensor r1 = contract(id, e0, {{1, 0}});
  CHECK(r1.at({0}) == Complex(1.0));
  CHECK(r1.at({1}) == Complex(0.0));

  const DenseTensor r2 = contract(x, e0, {{1, 0}});
  CHECK(r2.at({0}) == Complex(0.0));
  CHECK(r2.at({1}) == Complex(1.0));
}

TEST_CASE("contract: random matrix product matches the naive triple loop") {
  RandomStream rng(11, 0);
  const DenseTensor a = random_tensor({3, 4}, rng);
  const DenseTensor b = random_tensor({4, 2}, rng);
  const DenseTensor got = contract(a, b, {{1, 0}});
  const DenseTensor want = naive_contract(a, b, {{1, 0}});
  CHECK(got.shape() == std::vector<std::int64_t>{3, 2});
  CHECK(max_abs_diff(got, want) < 1e-13);
}

TEST_CASE("contract: multi-axis pairings agree with index enumeration") {
  RandomStream rng(12, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const DenseTensor a = random_tensor({2, 3, 4, 2}, rng);
    const DenseTensor b = random_tensor({4, 2, 3}, rng);
    const std::vector<std::pair<int, int>> pairs{{2, 0}, {1, 2}};
    const DenseTensor got = contract(a, b, {{2, 0}, {1, 2}});
    const DenseTensor want = naive_contract(a, b, pairs);
    REQUIRE(got.shape() == want.shape());
    CHECK(max_abs_diff(got, want) < 1e-13);
  }
}

TEST_CASE("contract: randomized shapes and pairings against enumeration") {
  RandomStream rng(24, 0);
  for (int trial = 0; trial < 60; ++trial) {
    const int ra = 1 + static_cast<int>(rng.uniform() * 3);
    const int rb = 1 + static_cast<int>(rng.uniform() * 3);
    std::vector<std::int64_t> sa(ra), sb(rb);
    for (auto& d : sa) d = 1 + static_cast<std::int64_t>(rng.uniform() * 4);
    for (auto& d : sb) d = 1 + static_cast<std::int64_t>(rng.uniform() * 4);
    // pair a random prefix of axes with matching dimensions
    const int n_pairs = 1 + static_cast<int>(rng.uniform() * std::min(ra, rb));
    std::vector<std::pair<int, int>> pairs;
    for (int p = 0; p < n_pairs; ++p) {
      sb[rb - 1 - p] = sa[p];
      pairs.push_back({p, rb - 1 - p});
    }
    const DenseTensor a = random_tensor(sa, rng);
    const DenseTensor b = random_tensor(sb, rng);
    const DenseTensor got =
        contract(a, b, std::span<const std::pair<int, int>>(pairs));
    const DenseTensor want = naive_contract(a, b, pairs);
    REQUIRE(got.shape() == want.shape());
    CHECK(max_abs_diff(got, want) < 1e-12);
  }
}

TEST_CASE("contract: bilinear in the first argument") {
  RandomStream rng(13, 0);
  const DenseTensor a1 = random_tensor({3, 3}, rng);
  const DenseTensor a2 = random_tensor({3, 3}, rng);
  const DenseTensor b = random_tensor({3, 3}, rng);
  const Complex alpha(0.7, -0.2);

  const DenseTensor lhs = contract(add(a1.scaled(alpha), a2), b, {{1, 0}});
  const DenseTensor rhs = add(contract(a1, b, {{1, 0}}).scaled(alpha), contract(a2, b, {{1, 0}}));
  CHECK(max_abs_diff(lhs, rhs) < 1e-13);
}

TEST_CASE("contract: dimension mismatch is rejected") {
  const DenseTensor a({2, 3});
  const DenseTensor b({4, 2});
  CHECK_THROWS_AS(contract(a, b, {{1, 0}}), std::invalid_argument);
}

TEST_CASE("factorize_bond: identity input gives unit-phase factors") {
  const auto [q, r] = factorize_bond(DenseTensor::identity(2), 1, FactorSide::Left);
  // Q R = I and Q unitary up to column phases.
  const DenseTensor recon = contract(q, r, {{1, 0}});
  CHECK(max_abs_diff(recon, DenseTensor::identity(2)) < 1e-12);
  for (std::int64_t i = 0; i < 2; ++i) {
    for (std::int64_t j = 0; j < 2; ++j) {
      CHECK(std::abs(std::abs(q.at({i, j})) - (i == j ? 1.0 : 0.0)) < 1e-12);
    }
  }
}

TEST_CASE("factorize_bond: reconstruction and isometry on both sides") {
  RandomStream rng(14, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const DenseTensor t = random_tensor({3, 2, 4}, rng);

    const auto [q, r] = factorize_bond(t, 2, FactorSide::Left);
    CHECK(max_abs_diff(contract(q, r, {{2, 0}}), t) < 1e-12);
    const DenseTensor qq = contract(q.conjugated(), q, {{0, 0}, {1, 1}});
    CHECK(max_abs_diff(qq, DenseTensor::identity(qq.dim(0))) < 1e-12);

    const auto [l, q2] = factorize_bond(t, 1, FactorSide::Right);
    CHECK(max_abs_diff(contract(l, q2, {{1, 0}}), t) < 1e-12);
    const DenseTensor qq2 = contract(q2, q2.conjugated(), {{1, 1}, {2, 2}});
    CHECK(max_abs_diff(qq2, DenseTensor::identity(qq2.dim(0))) < 1e-12);
  }
}

TEST_CASE("factorize_bond: rank-1 outer product reconstructs exactly") {
  RandomStream rng(15, 0);
  const DenseTensor u = random_tensor({4}, rng);
  const DenseTensor v = random_tensor({4}, rng);
  DenseTensor m({4, 4});
  for (std::int64_t i = 0; i < 4; ++i) {
    for (std::int64_t j = 0; j < 4; ++j) m.at({i, j}) = u.at({i}) * v.at({j});
  }
  const auto [q, r] = factorize_bond(m, 1, FactorSide::Left);
  CHECK(max_abs_diff(contract(q, r, {{1, 0}}), m) < 1e-12);
}

TEST_CASE("svd_truncate: degenerate identity keeps one value by stored order") {
  const SvdSplit s = svd_truncate(DenseTensor::identity(2), 1, 1, 0.0);
  REQUIRE(s.singular_values.size() == 1);
  CHECK(s.singular_values[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(s.discarded_weight == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("svd_truncate: rank-1 matrix is exact at chi 1") {
  RandomStream rng(16, 0);
  const DenseTensor u = random_tensor({4}, rng);
  const DenseTensor v = random_tensor({4}, rng);
  DenseTensor m({4, 4});
  for (std::int64_t i = 0; i < 4; ++i) {
    for (std::int64_t j = 0; j < 4; ++j) m.at({i, j}) = u.at({i}) * v.at({j});
  }
  const SvdSplit s = svd_truncate(m, 1, 1, 0.0);
  CHECK(s.discarded_weight <= 1e-24);
  DenseTensor scaled = s.left;
  for (std::int64_t i = 0; i < 4; ++i) {
    scaled.at({i, 0}) *= s.singular_values[0];
  }
  const DenseTensor recon = contract(scaled, s.right, {{1, 0}});
  CHECK(max_abs_diff(recon, m) < 1e-12);
}

TEST_CASE("svd_truncate: discarded weight equals the reconstruction error") {
  RandomStream rng(17, 0);
  for (int trial = 0; trial < 8; ++trial) {
    const DenseTensor m = random_tensor({4, 4}, rng);
    const SvdSplit s = svd_truncate(m, 1, 2, 0.0);
    REQUIRE(s.singular_values.size() == 2);

    DenseTensor scaled = s.left;
    for (std::int64_t i = 0; i < 4; ++i) {
      for (std::size_t k = 0; k < s.singular_values.size(); ++k) {
        scaled.at({i, static_cast<std::int64_t>(k)}) *= s.singular_values[k];
      }
    }
    const DenseTensor recon = contract(scaled, s.right, {{1, 0}});
    double err2 = 0.0;
    for (std::int64_t i = 0; i < m.size(); ++i) {
      err2 += std::norm(recon.data()[i] - m.data()[i]);
    }
    CHECK(err2 == doctest::Approx(s.discarded_weight).epsilon(1e-10));

    // Cross-check the kept values against an independent eigensolve of
    // the Gram matrix.
    const DenseTensor gram = contract(m.conjugated(), m, {{0, 0}});
    auto [evals, evecs] = eigh(gram);
    std::sort(evals.begin(), evals.end(), std::greater<>());
    for (std::size_t k = 0; k < s.singular_values.size(); ++k) {
      CHECK(s.singular_values[k] * s.singular_values[k] ==
            doctest::Approx(evals[k]).epsilon(1e-9));
    }
  }
}

TEST_CASE("svd_truncate: lossless at full rank and zero threshold") {
  RandomStream rng(18, 0);
  const DenseTensor m = random_tensor({4, 4}, rng);
  const SvdSplit s = svd_truncate(m, 1, 4, 0.0);
  CHECK(s.discarded_weight <= 1e-24);
}

TEST_CASE("svd_truncate: all values below threshold still keeps one") {
  DenseTensor m({2, 2});
  m.at({0, 0}) = 1e-300;
  const SvdSplit s = svd_truncate(m, 1, 2, 0.5);
  CHECK(s.singular_values.size() == 1);
}

TEST_CASE("expm_apply: zero scale returns the input") {
  RandomStream rng(19, 0);
  const DenseTensor h = random_tensor({3, 3}, rng);
  const DenseTensor v = random_tensor({3}, rng);
  const DenseTensor out = expm_apply(h, v, Complex(0.0));
  CHECK(max_abs_diff(out, v) == 0.0);
}

TEST_CASE("expm_apply: analytic 2x2 rotation") {
  const DenseTensor x = DenseTensor::matrix2(0, 1, 1, 0);
  const DenseTensor v({2}, {1.0, 0.0});
  const double theta = 0.3;
  const DenseTensor out = expm_apply(x, v, Complex(0.0, -theta));
  CHECK(std::abs(out.at({0}) - Complex(std::cos(theta), 0.0)) < 1e-14);
  CHECK(std::abs(out.at({1}) - Complex(0.0, -std::sin(theta))) < 1e-14);
}

TEST_CASE("expm_apply: anti-Hermitian generators preserve the norm") {
  RandomStream rng(20, 0);
  for (int trial = 0; trial < 5; ++trial) {
    DenseTensor h = random_tensor({6, 6}, rng);
    // Hermitize
    for (std::int64_t i = 0; i < 6; ++i) {
      for (std::int64_t j = 0; j <= i; ++j) {
        const Complex avg = 0.5 * (h.at({i, j}) + std::conj(h.at({j, i})));
        h.at({i, j}) = avg;
        h.at({j, i}) = std::conj(avg);
      }
    }
    const DenseTensor v = random_tensor({6}, rng);
    const DenseTensor out = expm_apply(h, v, Complex(0.0, -0.01));
    CHECK(out.norm() == doctest::Approx(v.norm()).epsilon(1e-12));

    // semigroup property
    const DenseTensor two = expm_apply(h, v, Complex(0.0, -0.02));
    const DenseTensor twice = expm_apply(h, out, Complex(0.0, -0.01));
    CHECK(max_abs_diff(two, twice) < 1e-10);
  }
}

TEST_CASE("expm_apply: large Hermitian matrices go through Lanczos") {
  RandomStream rng(21, 0);
  const std::int64_t n = 80;
  DenseTensor h({n, n});
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j <= i; ++j) {
      const Complex v(2.0 * rng.uniform() - 1.0, i == j ? 0.0 : 2.0 * rng.uniform() - 1.0);
      h.at({i, j}) = v;
      h.at({j, i}) = std::conj(v);
    }
  }
  const DenseTensor v = random_tensor({n}, rng);
  // big enough norm to skip the Taylor fast path
  const DenseTensor got = expm_apply(h, v, Complex(0.0, -0.8));

  auto [evals, evecs] = eigh(h);
  DenseTensor coeff = contract(evecs.conjugated(), v, {{0, 0}});
  for (std::int64_t i = 0; i < n; ++i) {
    coeff.at({i}) *= std::exp(Complex(0.0, -0.8) * evals[i]);
  }
  const DenseTensor want = contract(evecs, coeff, {{1, 0}});
  CHECK(max_abs_diff(got, want) < 1e-9);
}

TEST_CASE("expm_dense against the series on a non-Hermitian matrix") {
  RandomStream rng(22, 0);
  const DenseTensor a = random_tensor({4, 4}, rng);
  const DenseTensor e = expm_dense(a, Complex(1.0));

  // plain long Taylor sum as reference
  DenseTensor acc = DenseTensor::identity(4);
  DenseTensor term = DenseTensor::identity(4);
  for (int k = 1; k <= 60; ++k) {
    term = contract(term, a, {{1, 0}}).scaled(1.0 / k);
    acc = add(acc, term);
  }
  CHECK(max_abs_diff(e, acc) < 1e-12);
}

TEST_CASE("permute and reshape round trips") {
  RandomStream rng(23, 0);
  const DenseTensor t = random_tensor({2, 3, 4}, rng);
  const DenseTensor p = t.permuted({2, 0, 1});
  CHECK(p.dim(0) == 4);
  CHECK(p.at({3, 1, 2}) == t.at({1, 2, 3}));
  const DenseTensor back = p.permuted({1, 2, 0});
  CHECK(max_abs_diff(back, t) == 0.0);
}
