#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tjm/tensor.hpp"

namespace tjm {

/// Result of a truncated singular value decomposition across a bond.
/// `left` has orthonormal columns (U†U = I), `right` has orthonormal
/// rows (V V† = I), and `left · diag(s) · right` reconstructs the kept
/// part of the input. `discarded_weight` is the sum of the squared
/// dropped singular values.
struct SvdSplit {
  DenseTensor left;                     // input row axes + {k}
  std::vector<double> singular_values;  // kept values, descending
  DenseTensor right;                    // {k} + input column axes
  double discarded_weight = 0.0;
};

enum class FactorSide {
  Left,   // t = Q · R with Q left-isometric (Q†Q = I)
  Right,  // t = L · Q with Q right-isometric (Q Q† = I)
};

/// QR/LQ bond factorization. Axes [0, split_axis) form the matrix rows,
/// axes [split_axis, rank) the columns. The isometric factor sits on the
/// side named by `direction`; the product of the two factors reconstructs
/// the input.
std::pair<DenseTensor, DenseTensor> factorize_bond(const DenseTensor& t,
                                                   int split_axis,
                                                   FactorSide direction);

/// Truncated SVD across `split_axis`. Keeps
/// min(chi_max, #{sigma_i > threshold * sigma_max}) singular values but
/// never fewer than one.
SvdSplit svd_truncate(const DenseTensor& t, int split_axis,
                      std::int64_t chi_max, double threshold);

/// Computes exp(scale * h) · v for a square matrix h. Small-norm
/// generators take a truncated Taylor series evaluated to machine
/// precision; otherwise Hermitian matrices go through a dense eigendecomposition up
/// to dimension 64 and a Lanczos iteration (Krylov dimension <= 16,
/// residual tolerance 1e-12) above, falling back to the dense path if the
/// iteration does not converge. Non-Hermitian input uses scaling and
/// squaring.
DenseTensor expm_apply(const DenseTensor& h, const DenseTensor& v, Complex scale);

/// Dense exp(scale * a) for a square matrix, by scaling and squaring.
DenseTensor expm_dense(const DenseTensor& a, Complex scale);

/// Eigendecomposition of a Hermitian matrix; returns {eigenvalues
/// ascending, column eigenvectors}.
std::pair<std::vector<double>, DenseTensor> eigh(const DenseTensor& h);

}  // namespace tjm
