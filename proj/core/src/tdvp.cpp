#include "tjm/tdvp.hpp"

#include <cmath>
#include <stdexcept>

#include "tjm/linalg.hpp"

namespace tjm {

namespace {

DenseTensor boundary_env() {
  DenseTensor t({1, 1, 1});
  t.at({0, 0, 0}) = 1.0;
  return t;
}

// env (a', w, a), absorbing site k from the left:
// out[b', w2, b] = sum env[a',w,a] conj(A[a',s',b']) W[w,s',s,w2] A[a,s,b]
DenseTensor absorb_left(const DenseTensor& env, const DenseTensor& a,
                        const DenseTensor& w) {
  DenseTensor t = contract(env, a, {{2, 0}});            // (a', w, s, b)
  t = contract(t, w, {{1, 0}, {2, 2}});                  // (a', b, s', w2)
  t = contract(t, a.conjugated(), {{0, 0}, {2, 1}});     // (b, w2, b')
  return t.permuted({2, 1, 0});
}

// env (b', w2, b), absorbing site k from the right.
DenseTensor absorb_right(const DenseTensor& env, const DenseTensor& a,
                         const DenseTensor& w) {
  DenseTensor t = contract(a, env, {{2, 2}});            // (a, s, b', w2)
  t = contract(t, w, {{1, 2}, {3, 3}});                  // (a, b', w, s')
  t = contract(t, a.conjugated(), {{1, 2}, {3, 1}});     // (a, w, a')
  return t.permuted({2, 1, 0});
}

// Effective one-site Hamiltonian as a dense matrix over (l, s, r).
DenseTensor one_site_matrix(const DenseTensor& le, const DenseTensor& w,
                            const DenseTensor& re) {
  DenseTensor t = contract(le, w, {{1, 0}});             // (a', a, s', s, w2)
  t = contract(t, re, {{4, 1}});                         // (a', a, s', s, b', b)
  t = t.permuted({0, 2, 4, 1, 3, 5});                    // (a', s', b', a, s, b)
  const std::int64_t m = t.dim(0) * t.dim(1) * t.dim(2);
  return t.reshaped({m, m});
}

// Effective zero-site (bond) Hamiltonian over (l, r).
DenseTensor bond_matrix(const DenseTensor& le, const DenseTensor& re) {
  DenseTensor t = contract(le, re, {{1, 1}});            // (a', a, b', b)
  t = t.permuted({0, 2, 1, 3});                          // (a', b', a, b)
  const std::int64_t m = t.dim(0) * t.dim(1);
  return t.reshaped({m, m});
}

// Effective two-site Hamiltonian over (l, s1, s2, r).
DenseTensor two_site_matrix(const DenseTensor& le, const DenseTensor& w1,
                            const DenseTensor& w2, const DenseTensor& re) {
  DenseTensor t = contract(le, w1, {{1, 0}});            // (a', a, s1', s1, w2)
  t = contract(t, w2, {{4, 0}});                         // (a', a, s1', s1, s2', s2, w3)
  t = contract(t, re, {{6, 1}});                         // (a', a, s1', s1, s2', s2, b', b)
  t = t.permuted({0, 2, 4, 6, 1, 3, 5, 7});
  const std::int64_t m = t.dim(0) * t.dim(1) * t.dim(2) * t.dim(3);
  return t.reshaped({m, m});
}

DenseTensor evolve(const DenseTensor& gen, const DenseTensor& block, Complex scale) {
  return expm_apply(gen, block.reshaped({block.size()}), scale).reshaped(block.shape());
}

std::vector<DenseTensor> build_rights(const MpsState& s, const MpOperator& h) {
  const int n = s.n_sites();
  std::vector<DenseTensor> right(n);
  right[n - 1] = boundary_env();
  for (int k = n - 1; k > 0; --k) {
    right[k - 1] = absorb_right(right[k], s.site(k), h.site(k));
  }
  return right;
}

void one_site_sweep(MpsState& s, const MpOperator& h, double dt) {
  const int n = s.n_sites();
  const Complex ih(0.0, -0.5 * dt);  // site generator phase, dt/2 forward
  const Complex ihb(0.0, 0.5 * dt);  // bond tensors run backward

  s.move_center(0);
  std::vector<DenseTensor> right = build_rights(s, h);
  std::vector<DenseTensor> left(n);
  left[0] = boundary_env();

  for (int k = 0; k < n; ++k) {
    DenseTensor h1 = one_site_matrix(left[k], h.site(k), right[k]);
    s.mutable_site(k) = evolve(h1, s.site(k), ih);
    if (k + 1 < n) {
      auto [q, c] = factorize_bond(s.site(k), 2, FactorSide::Left);
      s.mutable_site(k) = std::move(q);
      left[k + 1] = absorb_left(left[k], s.site(k), h.site(k));
      DenseTensor kmat = bond_matrix(left[k + 1], right[k]);
      c = evolve(kmat, c, ihb);
      s.mutable_site(k + 1) = contract(c, s.site(k + 1), {{1, 0}});
      s.set_center(k + 1);
    }
  }

  for (int k = n - 1; k >= 0; --k) {
    DenseTensor h1 = one_site_matrix(left[k], h.site(k), right[k]);
    s.mutable_site(k) = evolve(h1, s.site(k), ih);
    if (k > 0) {
      auto [c, q] = factorize_bond(s.site(k), 1, FactorSide::Right);
      s.mutable_site(k) = std::move(q);
      right[k - 1] = absorb_right(right[k], s.site(k), h.site(k));
      DenseTensor kmat = bond_matrix(left[k], right[k - 1]);
      c = evolve(kmat, c, ihb);
      s.mutable_site(k - 1) = contract(s.site(k - 1), c, {{2, 0}});
      s.set_center(k - 1);
    }
  }
}

// Splits the evolved two-site block, truncates, and rescales so the
// truncation does not change the state norm. Returns (left site tensor,
// center tensor on the requested side).
void split_two_site(const DenseTensor& theta, std::int64_t chi_max, double threshold,
                    bool center_right, DenseTensor& out_left, DenseTensor& out_right) {
  const double pre_norm = theta.norm();
  SvdSplit svd = svd_truncate(theta, 2, chi_max, threshold);
  double kept = 0.0;
  for (double sv : svd.singular_values) kept += sv * sv;
  const double rescale = kept > 0.0 ? pre_norm / std::sqrt(kept) : 1.0;

  const std::int64_t chi = static_cast<std::int64_t>(svd.singular_values.size());
  if (center_right) {
    out_left = svd.left;  // (l, s1, chi), isometric
    DenseTensor c = svd.right;  // (chi, s2, r)
    auto data = c.data();
    const std::int64_t row = c.size() / chi;
    for (std::int64_t i = 0; i < chi; ++i) {
      const Complex f = svd.singular_values[i] * rescale;
      for (std::int64_t j = 0; j < row; ++j) data[i * row + j] *= f;
    }
    out_right = std::move(c);
  } else {
    out_right = svd.right;  // (chi, s2, r), isometric rows
    DenseTensor c = svd.left;  // (l, s1, chi)
    auto data = c.data();
    const std::int64_t rows = c.size() / chi;
    for (std::int64_t j = 0; j < rows; ++j) {
      for (std::int64_t i = 0; i < chi; ++i) {
        data[j * chi + i] *= svd.singular_values[i] * rescale;
      }
    }
    out_left = std::move(c);
  }
}

void two_site_sweep(MpsState& s, const MpOperator& h, double dt,
                    std::int64_t chi_max, double threshold) {
  const int n = s.n_sites();
  if (n < 2) {
    one_site_sweep(s, h, dt);
    return;
  }
  const Complex ih(0.0, -0.5 * dt);
  const Complex ihb(0.0, 0.5 * dt);

  s.move_center(0);
  std::vector<DenseTensor> right = build_rights(s, h);
  std::vector<DenseTensor> left(n);
  left[0] = boundary_env();

  for (int k = 0; k + 1 < n; ++k) {
    DenseTensor theta = contract(s.site(k), s.site(k + 1), {{2, 0}});
    DenseTensor h2 = two_site_matrix(left[k], h.site(k), h.site(k + 1), right[k + 1]);
    theta = evolve(h2, theta, ih);
    DenseTensor a, c;
    split_two_site(theta, chi_max, threshold, true, a, c);
    s.mutable_site(k) = std::move(a);
    s.mutable_site(k + 1) = std::move(c);
    s.set_center(k + 1);
    left[k + 1] = absorb_left(left[k], s.site(k), h.site(k));
    if (k + 2 < n) {
      DenseTensor h1 = one_site_matrix(left[k + 1], h.site(k + 1), right[k + 1]);
      s.mutable_site(k + 1) = evolve(h1, s.site(k + 1), ihb);
    }
  }

  for (int k = n - 2; k >= 0; --k) {
    DenseTensor theta = contract(s.site(k), s.site(k + 1), {{2, 0}});
    DenseTensor h2 = two_site_matrix(left[k], h.site(k), h.site(k + 1), right[k + 1]);
    theta = evolve(h2, theta, ih);
    DenseTensor c, b;
    split_two_site(theta, chi_max, threshold, false, c, b);
    s.mutable_site(k) = std::move(c);
    s.mutable_site(k + 1) = std::move(b);
    s.set_center(k);
    right[k] = absorb_right(right[k + 1], s.site(k + 1), h.site(k + 1));
    if (k > 0) {
      DenseTensor h1 = one_site_matrix(left[k], h.site(k), right[k]);
      s.mutable_site(k) = evolve(h1, s.site(k), ihb);
    }
  }
}

}  // namespace

EnvironmentStack build_environments(const MpsState& s, const MpOperator& h) {
  if (s.n_sites() != h.n_sites()) {
    throw std::invalid_argument("build_environments: site count mismatch");
  }
  const int n = s.n_sites();
  EnvironmentStack env;
  env.left.resize(n);
  env.right.resize(n);
  env.left[0] = boundary_env();
  for (int k = 0; k + 1 < n; ++k) {
    env.left[k + 1] = absorb_left(env.left[k], s.site(k), h.site(k));
  }
  env.right[n - 1] = boundary_env();
  for (int k = n - 1; k > 0; --k) {
    env.right[k - 1] = absorb_right(env.right[k], s.site(k), h.site(k));
  }
  return env;
}

Complex expect_mpo(const MpsState& s, const MpOperator& h) {
  if (s.n_sites() != h.n_sites()) {
    throw std::invalid_argument("expect_mpo: site count mismatch");
  }
  DenseTensor acc = boundary_env();
  DenseTensor nrm({1, 1});
  nrm.at({0, 0}) = 1.0;
  for (int k = 0; k < s.n_sites(); ++k) {
    acc = absorb_left(acc, s.site(k), h.site(k));
    // norm transfer: nrm[b', b] = sum nrm[a', a] conj(A[a',s,b']) A[a,s,b]
    DenseTensor t = contract(nrm, s.site(k), {{1, 0}});       // (a', s, b)
    t = contract(s.site(k).conjugated(), t, {{0, 0}, {1, 1}});  // (b', b)
    nrm = std::move(t);
  }
  const Complex e = acc.at({0, 0, 0});
  const Complex n = nrm.at({0, 0});
  if (std::abs(n) == 0.0) throw std::runtime_error("expect_mpo: zero-norm state");
  return e / n;
}

void tdvp_sweep(MpsState& s, const MpOperator& h, double dt, SweepMode mode,
                std::int64_t chi_max, double threshold) {
  if (s.n_sites() != h.n_sites()) {
    throw std::invalid_argument("tdvp_sweep: site count mismatch");
  }
  if (dt == 0.0) return;
  if (mode == SweepMode::OneSite) {
    one_site_sweep(s, h, dt);
  } else {
    two_site_sweep(s, h, dt, chi_max, threshold);
  }
}

void dynamic_step(MpsState& s, const MpOperator& h, double dt,
                  std::int64_t chi_max, double threshold) {
  const SweepMode mode = (s.n_sites() >= 2 && s.max_bond_dim() < chi_max)
                             ? SweepMode::TwoSite
                             : SweepMode::OneSite;
  tdvp_sweep(s, h, dt, mode, chi_max, threshold);
}

}  // namespace tjm
