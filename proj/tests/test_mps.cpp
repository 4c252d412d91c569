#include <doctest.h>

#include "test_support.hpp"
#include "tjm/mpo.hpp"
#include "tjm/mps.hpp"

using namespace tjm;
using test::max_abs_diff;
using test::random_state;

namespace {

MpsState random_mps(int n, RandomStream& rng) {
  auto amps = random_state(std::int64_t{1} << n, rng);
  return MpsState::from_dense(DenseTensor({std::int64_t{1} << n}, amps));
}

}  // namespace

TEST_CASE("from_product_state: |00> stores unit amplitudes on the 0 leg") {
  const MpsState s = MpsState::from_product_state({0, 0});
  for (int k = 0; k < 2; ++k) {
    CHECK(s.site(k).at({0, 0, 0}) == Complex(1.0));
    CHECK(s.site(k).at({0, 1, 0}) == Complex(0.0));
  }
  CHECK(s.norm_squared() == doctest::Approx(1.0));
  CHECK(s.center() == 0);
}

TEST_CASE("from_product_state: single site |1>") {
  const MpsState s = MpsState::from_product_state({1});
  CHECK(s.site(0).at({0, 1, 0}) == Complex(1.0));
  const DenseTensor dense = s.to_dense();
  CHECK(dense.at({1}) == Complex(1.0));
}

TEST_CASE("from_product_state: 100 sites stay at bond dimension one") {
  const MpsState s = MpsState::from_product_state(std::vector<int>(100, 0));
  CHECK(s.max_bond_dim() == 1);
  CHECK(s.norm_squared() == doctest::Approx(1.0));
}

TEST_CASE("from_product_state: empty chain is rejected") {
  CHECK_THROWS_AS(MpsState::from_product_state({}), std::invalid_argument);
}

TEST_CASE("to_dense: |01> hits the right basis slot") {
  const MpsState s = MpsState::from_product_state({0, 1});
  const DenseTensor dense = s.to_dense();
  CHECK(dense.at({0}) == Complex(0.0));
  CHECK(dense.at({1}) == Complex(1.0));  // |00>,|01>,|10>,|11> ordering
}

TEST_CASE("to_dense: product of local rotations is a Kronecker product") {
  const MpsState s = MpsState::uniform_product(3, Complex(0.6), Complex(0.8));
  const DenseTensor dense = s.to_dense();
  for (int b = 0; b < 8; ++b) {
    double want = 1.0;
    for (int k = 0; k < 3; ++k) want *= ((b >> (2 - k)) & 1) ? 0.8 : 0.6;
    CHECK(std::abs(dense.at({b}) - Complex(want)) < 1e-14);
  }
}

TEST_CASE("from_dense round trip") {
  RandomStream rng(31, 0);
  const auto amps = random_state(16, rng);
  const MpsState s = MpsState::from_dense(DenseTensor({16}, amps));
  const DenseTensor back = s.to_dense();
  for (int i = 0; i < 16; ++i) CHECK(std::abs(back.at({i}) - amps[i]) < 1e-12);
  CHECK(s.canonical_defect() < 1e-10);
}

TEST_CASE("to_dense refuses chains beyond the cap") {
  const MpsState s = MpsState::from_product_state(std::vector<int>(20, 0));
  CHECK_THROWS_AS(s.to_dense(), std::invalid_argument);
}

TEST_CASE("move_center: dense vector invariant under center moves") {
  RandomStream rng(32, 0);
  MpsState s = random_mps(4, rng);
  const DenseTensor before = s.to_dense();
  s.move_center(0);
  CHECK(s.canonical_defect() < 1e-10);
  s.move_center(3);
  s.move_center(0);
  CHECK(max_abs_diff(s.to_dense(), before) < 1e-12);

  // moving to the current center is a no-op
  const DenseTensor snap = s.to_dense();
  s.move_center(0);
  CHECK(max_abs_diff(s.to_dense(), snap) == 0.0);
}

TEST_CASE("move_center: invariant for every target on a longer chain") {
  RandomStream rng(38, 0);
  MpsState s = random_mps(8, rng);
  const DenseTensor before = s.to_dense();
  for (int j = 0; j < 8; ++j) {
    s.move_center(j);
    CHECK(s.center() == j);
    CHECK(s.canonical_defect() < 1e-10);
    CHECK(max_abs_diff(s.to_dense(), before) < 1e-12);
  }
}

TEST_CASE("apply_local: a Z jump flips the phase of the transverse polarization") {
  MpsState s = MpsState::uniform_product(3, 1.0, 1.0);  // |+++>
  CHECK(s.expect_local(1, pauli_x()).real() == doctest::Approx(1.0));
  s.apply_local(1, pauli_z(), true);
  CHECK(s.expect_local(1, pauli_x()).real() == doctest::Approx(-1.0));
  CHECK(s.expect_local(1, pauli_z()).real() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s.expect_local(0, pauli_x()).real() == doctest::Approx(1.0));
}

TEST_CASE("apply_local: lowering operator on |0> annihilates") {
  MpsState s = MpsState::from_product_state({0, 0});
  const DenseTensor lower = DenseTensor::matrix2(0, 1, 0, 0);  // sigma-
  CHECK_THROWS_AS(s.apply_local(0, lower, true), AnnihilatedStateError);
}

TEST_CASE("apply_local: raising operator flips |00> to |01>") {
  MpsState s = MpsState::from_product_state({0, 0});
  const DenseTensor raise = DenseTensor::matrix2(0, 0, 1, 0);  // sigma+
  s.apply_local(1, raise, true);
  const DenseTensor dense = s.to_dense();
  CHECK(std::abs(dense.at({1}) - Complex(1.0)) < 1e-14);
  CHECK(s.norm_squared() == doctest::Approx(1.0));
}

TEST_CASE("apply_local: Z leaves populations and norm alone") {
  MpsState s = MpsState::from_product_state({1, 0, 1});
  const DenseTensor z = pauli_z();
  s.apply_local(1, z, false);
  CHECK(s.norm_squared() == doctest::Approx(1.0));
  CHECK(s.expect_local(0, z).real() == doctest::Approx(-1.0));
  CHECK(s.expect_local(1, z).real() == doctest::Approx(1.0));
  CHECK(s.expect_local(2, z).real() == doctest::Approx(-1.0));
}

TEST_CASE("expect_local: trivial values on product states") {
  MpsState s = MpsState::from_product_state({0, 0, 0});
  CHECK(std::abs(s.expect_local(1, pauli_x())) < 1e-14);
  for (int k = 0; k < 3; ++k) {
    CHECK(s.expect_local(k, pauli_z()).real() == doctest::Approx(1.0));
  }
}

TEST_CASE("expect_local: random state against the dense contraction") {
  RandomStream rng(33, 0);
  MpsState s = random_mps(3, rng);
  const DenseTensor dense = s.to_dense();
  const DenseTensor op = test::random_tensor({2, 2}, rng);

  for (int site = 0; site < 3; ++site) {
    // dense <psi| I (x) op (x) I |psi>
    Complex want = 0.0;
    double n2 = 0.0;
    for (int b = 0; b < 8; ++b) {
      n2 += std::norm(dense.at({b}));
      for (int a = 0; a < 2; ++a) {
        const int bit = (b >> (2 - site)) & 1;
        const int flipped = (b & ~(1 << (2 - site))) | (a << (2 - site));
        want += std::conj(dense.at({b})) * op.at({bit, a}) * dense.at({flipped});
      }
    }
    want /= n2;
    CHECK(std::abs(s.expect_local(site, op) - want) < 1e-12);
  }
}

TEST_CASE("expect_local: Hermitian operator gives a real bounded value") {
  RandomStream rng(34, 0);
  MpsState s = random_mps(4, rng);
  CHECK(std::abs(s.expect_local(2, pauli_x()).imag()) < 1e-12);
  CHECK(std::abs(s.expect_local(2, pauli_x()).real()) <= 1.0 + 1e-12);
}

TEST_CASE("norm_squared: scaling the center scales the norm") {
  RandomStream rng(35, 0);
  MpsState s = random_mps(4, rng);
  s.normalize();
  CHECK(s.norm_squared() == doctest::Approx(1.0));
  s.mutable_site(s.center()).scale(0.9);
  CHECK(s.norm_squared() == doctest::Approx(0.81));

  const double dense_n2 = s.to_dense().norm_squared();
  CHECK(s.norm_squared() == doctest::Approx(dense_n2).epsilon(1e-12));
}

TEST_CASE("local_density_matrices agree with expect_local") {
  RandomStream rng(36, 0);
  MpsState s = random_mps(4, rng);
  auto rhos = s.local_density_matrices();
  const DenseTensor x = pauli_x();
  for (int site = 0; site < 4; ++site) {
    Complex tr = 0.0;
    for (std::int64_t i = 0; i < 2; ++i) {
      for (std::int64_t j = 0; j < 2; ++j) tr += rhos[site].at({i, j}) * x.at({j, i});
    }
    CHECK(std::abs(tr - s.expect_local(site, x)) < 1e-12);
    // unit trace
    CHECK(std::abs(rhos[site].at({0, 0}) + rhos[site].at({1, 1}) - Complex(1.0)) < 1e-12);
  }
}

TEST_CASE("canonical conditions hold after the public operations") {
  RandomStream rng(37, 0);
  MpsState s = random_mps(5, rng);
  s.move_center(2);
  CHECK(s.canonical_defect() < 1e-10);
  s.apply_local(4, pauli_x(), false);
  CHECK(s.canonical_defect() < 1e-10);
  s.apply_local(0, DenseTensor::matrix2(0.9, 0, 0, 0.7), true);
  CHECK(s.canonical_defect() < 1e-10);
  CHECK(s.norm_squared() == doctest::Approx(1.0));
}
