#pragma once

#include <stdexcept>
#include <vector>

#include "tjm/tensor.hpp"

namespace tjm {

/// Thrown when a local operator maps the state to (numerically) zero,
/// e.g. a lowering operator acting on its kernel.
struct AnnihilatedStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Matrix product state for a chain of qubits (physical dimension 2),
/// kept in mixed-canonical form: tensors strictly left of the center are
/// left-isometric, tensors strictly right are right-isometric. Site
/// tensors are rank-3 with index order (left bond, physical, right bond);
/// boundary bonds have dimension 1.
///
/// The represented vector is exp(log_norm) times the tensor contraction.
/// States are deliberately allowed to carry non-unit norm (no-jump
/// trajectory segments decay); normalize() is explicit.
class MpsState {
 public:
  /// Empty placeholder; assign a factory result before use.
  MpsState() = default;

  /// Product state |b_0 b_1 ... b_{N-1}> with b_i in {0, 1}. All bonds
  /// have dimension 1 and the center sits at site 0.
  static MpsState from_product_state(const std::vector<int>& bits);

  /// Uniform single-site product state with local amplitudes
  /// (amp0, amp1) at every site.
  static MpsState uniform_product(int n_sites, Complex amp0, Complex amp1);

  /// Exact MPS from a dense amplitude vector of length 2^N (site 0 is the
  /// most significant bit). Bonds take the ranks produced by successive
  /// factorizations; the center ends at the last site.
  static MpsState from_dense(const DenseTensor& amplitudes);

  int n_sites() const { return static_cast<int>(sites_.size()); }
  int center() const { return center_; }
  double log_norm() const { return log_norm_; }

  const DenseTensor& site(int k) const { return sites_.at(k); }
  DenseTensor& mutable_site(int k) { return sites_.at(k); }
  void set_center(int k) { center_ = k; }  // caller guarantees canonical flanks

  /// Interior bond dimensions (N-1 entries).
  std::vector<std::int64_t> bond_dims() const;
  std::int64_t max_bond_dim() const;

  /// Moves the orthogonality center by QR (rightward) / LQ (leftward)
  /// factorizations. The represented state is unchanged.
  void move_center(int target);

  /// Applies a 2x2 operator to one site; the center is moved there first.
  /// With renormalize set, the result is scaled back to unit norm (throws
  /// AnnihilatedStateError if the operator maps the state to zero).
  void apply_local(int site, const DenseTensor& op, bool renormalize);

  /// Normalized local expectation <psi|op_site|psi> / <psi|psi>.
  Complex expect_local(int site, const DenseTensor& op);

  /// Single-site reduced density matrices for every site, computed in one
  /// left-to-right sweep; each entry is a normalized 2x2 tensor.
  std::vector<DenseTensor> local_density_matrices();

  /// <psi|psi>, read off the center tensor.
  double norm_squared() const;

  /// Rescales to unit norm and clears log_norm.
  void normalize();

  /// Dense amplitude vector (2^N entries, site 0 most significant).
  DenseTensor to_dense(int max_sites = 14) const;

  /// Largest violation of the canonical conditions over both flanks;
  /// diagnostic for tests.
  double canonical_defect() const;

 private:
  std::vector<DenseTensor> sites_;
  int center_ = 0;
  double log_norm_ = 0.0;
};

}  // namespace tjm
