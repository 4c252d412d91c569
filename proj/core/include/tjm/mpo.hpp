#pragma once

#include <vector>

#include "tjm/tensor.hpp"

namespace tjm {

/// Matrix product operator over a qubit chain. Site tensors are rank-4
/// with index order (left bond, physical out, physical in, right bond);
/// boundary bonds have dimension 1. Immutable after construction and safe
/// to share read-only across trajectory workers.
class MpOperator {
 public:
  /// Transverse-field Ising Hamiltonian with open boundaries,
  ///   H = -J sum_i Z[i] Z[i+1] - g sum_i X[i],
  /// encoded with bond dimension 3 (1 for a single site).
  static MpOperator tfi(int n_sites, double j_coupling, double g_field);

  static MpOperator identity(int n_sites);

  int n_sites() const { return static_cast<int>(sites_.size()); }
  const DenseTensor& site(int k) const { return sites_.at(k); }
  std::int64_t max_bond_dim() const;

  /// Dense 2^n x 2^n matrix (site 0 most significant). Capped to keep the
  /// oracle path tractable.
  DenseTensor to_dense(int max_sites = 12) const;

 private:
  explicit MpOperator(std::vector<DenseTensor> sites) : sites_(std::move(sites)) {}

  std::vector<DenseTensor> sites_;
};

// Pauli matrices in the basis |0> = (1,0)^T, |1> = (0,1)^T.
DenseTensor pauli_x();
DenseTensor pauli_y();
DenseTensor pauli_z();

}  // namespace tjm
