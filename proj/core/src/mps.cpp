#include "tjm/mps.hpp"

#include <cmath>
#include <stdexcept>

#include "tjm/linalg.hpp"

namespace tjm {

MpsState MpsState::from_product_state(const std::vector<int>& bits) {
  if (bits.empty()) throw std::invalid_argument("from_product_state: empty chain");
  MpsState s;
  s.sites_.reserve(bits.size());
  for (int b : bits) {
    if (b != 0 && b != 1) throw std::invalid_argument("from_product_state: bits must be 0 or 1");
    DenseTensor t({1, 2, 1});
    t.at({0, b, 0}) = 1.0;
    s.sites_.push_back(std::move(t));
  }
  s.center_ = 0;
  return s;
}

MpsState MpsState::uniform_product(int n_sites, Complex amp0, Complex amp1) {
  if (n_sites < 1) throw std::invalid_argument("uniform_product: empty chain");
  const double nrm = std::sqrt(std::norm(amp0) + std::norm(amp1));
  if (nrm == 0.0) throw std::invalid_argument("uniform_product: zero amplitudes");
  MpsState s;
  s.sites_.reserve(n_sites);
  for (int k = 0; k < n_sites; ++k) {
    DenseTensor t({1, 2, 1});
    t.at({0, 0, 0}) = amp0 / nrm;
    t.at({0, 1, 0}) = amp1 / nrm;
    s.sites_.push_back(std::move(t));
  }
  s.center_ = 0;
  return s;
}

MpsState MpsState::from_dense(const DenseTensor& amplitudes) {
  const std::int64_t total = amplitudes.size();
  int n = 0;
  while ((std::int64_t{1} << n) < total) ++n;
  if ((std::int64_t{1} << n) != total || n < 1) {
    throw std::invalid_argument("from_dense: amplitude count must be 2^N");
  }

  MpsState s;
  DenseTensor rest = amplitudes.reshaped({1, total});
  std::int64_t chi = 1;
  for (int k = 0; k < n - 1; ++k) {
    const std::int64_t cols = rest.size() / (chi * 2);
    auto [q, r] = factorize_bond(rest.reshaped({chi, 2, cols}), 2, FactorSide::Left);
    s.sites_.push_back(q);  // (chi, 2, chi')
    chi = q.dim(2);
    rest = r;  // (chi', cols)
  }
  s.sites_.push_back(rest.reshaped({chi, 2, 1}));
  s.center_ = n - 1;
  return s;
}

std::vector<std::int64_t> MpsState::bond_dims() const {
  std::vector<std::int64_t> dims;
  for (int k = 0; k + 1 < n_sites(); ++k) dims.push_back(sites_[k].dim(2));
  return dims;
}

std::int64_t MpsState::max_bond_dim() const {
  std::int64_t best = 1;
  for (const auto& t : sites_) best = std::max(best, t.dim(2));
  return best;
}

void MpsState::move_center(int target) {
  if (target < 0 || target >= n_sites()) {
    throw std::invalid_argument("move_center: site out of range");
  }
  while (center_ < target) {
    auto [q, r] = factorize_bond(sites_[center_], 2, FactorSide::Left);
    sites_[center_] = std::move(q);
    sites_[center_ + 1] = contract(r, sites_[center_ + 1], {{1, 0}});
    ++center_;
  }
  while (center_ > target) {
    auto [l, q] = factorize_bond(sites_[center_], 1, FactorSide::Right);
    sites_[center_] = std::move(q);
    sites_[center_ - 1] = contract(sites_[center_ - 1], l, {{2, 0}});
    --center_;
  }
}

void MpsState::apply_local(int site, const DenseTensor& op, bool renormalize) {
  if (op.rank() != 2 || op.dim(0) != 2 || op.dim(1) != 2) {
    throw std::invalid_argument("apply_local: operator must be 2x2");
  }
  move_center(site);
  const double before = sites_[center_].norm_squared();
  // op[i,j] T[l,j,r] -> (i,l,r) -> (l,i,r)
  sites_[center_] = contract(op, sites_[center_], {{1, 1}}).permuted({1, 0, 2});
  if (renormalize) {
    const double after = sites_[center_].norm_squared();
    if (after <= 1e-24 * before) {
      throw AnnihilatedStateError("apply_local: operator annihilated the state");
    }
    sites_[center_].scale(1.0 / std::sqrt(after));
    log_norm_ = 0.0;
  }
}

Complex MpsState::expect_local(int site, const DenseTensor& op) {
  if (op.rank() != 2 || op.dim(0) != 2 || op.dim(1) != 2) {
    throw std::invalid_argument("expect_local: operator must be 2x2");
  }
  move_center(site);
  const DenseTensor& t = sites_[center_];
  const DenseTensor ot = contract(op, t, {{1, 1}}).permuted({1, 0, 2});
  Complex val = 0.0;
  double n2 = 0.0;
  auto td = t.data();
  auto od = ot.data();
  for (std::int64_t i = 0; i < t.size(); ++i) {
    val += std::conj(td[i]) * od[i];
    n2 += std::norm(td[i]);
  }
  if (n2 == 0.0) throw std::runtime_error("expect_local: zero-norm state");
  return val / n2;
}

std::vector<DenseTensor> MpsState::local_density_matrices() {
  move_center(0);
  std::vector<DenseTensor> rhos;
  rhos.reserve(n_sites());
  for (int k = 0; k < n_sites(); ++k) {
    const DenseTensor& t = sites_[center_];
    // rho[i, j] = sum_{l,r} T[l,i,r] conj(T[l,j,r]) / norm^2
    DenseTensor rho = contract(t, t.conjugated(), {{0, 0}, {2, 2}});
    double n2 = 0.0;
    for (const auto& v : t.data()) n2 += std::norm(v);
    if (n2 == 0.0) throw std::runtime_error("local_density_matrices: zero-norm state");
    rho.scale(1.0 / n2);
    rhos.push_back(std::move(rho));
    if (k + 1 < n_sites()) move_center(k + 1);
  }
  return rhos;
}

double MpsState::norm_squared() const {
  return std::exp(2.0 * log_norm_) * sites_[center_].norm_squared();
}

void MpsState::normalize() {
  const double n2 = sites_[center_].norm_squared();
  if (n2 <= 0.0 || !std::isfinite(n2)) {
    throw AnnihilatedStateError("normalize: state has zero or non-finite norm");
  }
  sites_[center_].scale(1.0 / std::sqrt(n2));
  log_norm_ = 0.0;
}

DenseTensor MpsState::to_dense(int max_sites) const {
  if (n_sites() > max_sites) {
    throw std::invalid_argument("to_dense: chain longer than the dense cap");
  }
  DenseTensor acc = sites_[0].reshaped({2, sites_[0].dim(2)});
  for (int k = 1; k < n_sites(); ++k) {
    acc = contract(acc, sites_[k], {{1, 0}});  // (D, 2, chi)
    acc = acc.reshaped({acc.dim(0) * 2, acc.dim(2)});
  }
  DenseTensor out = acc.reshaped({acc.dim(0)});
  if (log_norm_ != 0.0) out.scale(std::exp(log_norm_));
  return out;
}

double MpsState::canonical_defect() const {
  double worst = 0.0;
  auto check = [&](const DenseTensor& g) {
    const std::int64_t n = g.dim(0);
    for (std::int64_t i = 0; i < n; ++i) {
      for (std::int64_t j = 0; j < n; ++j) {
        const Complex want = i == j ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(g.at({i, j}) - want));
      }
    }
  };
  for (int k = 0; k < center_; ++k) {
    // sum_i A_i^dag A_i over (l, phys)
    check(contract(sites_[k].conjugated(), sites_[k], {{0, 0}, {1, 1}}));
  }
  for (int k = center_ + 1; k < n_sites(); ++k) {
    // sum_i A_i A_i^dag over (phys, r)
    check(contract(sites_[k], sites_[k].conjugated(), {{1, 1}, {2, 2}}));
  }
  return worst;
}

}  // namespace tjm
