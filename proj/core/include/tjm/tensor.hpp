#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

namespace tjm {

using Complex = std::complex<double>;

/// Dense multi-index array with a row-major linearization. All tensor
/// operations in the library are value-semantic: they take immutable
/// inputs and return fresh tensors, so concurrent use from independent
/// trajectory workers is safe.
class DenseTensor {
 public:
  DenseTensor() = default;

  /// Zero-initialized tensor. Every dimension must be >= 1.
  explicit DenseTensor(std::vector<std::int64_t> shape);

  DenseTensor(std::vector<std::int64_t> shape, std::vector<Complex> data);

  static DenseTensor scalar(Complex value);
  static DenseTensor identity(std::int64_t n);
  /// 2x2 matrix in row-major order {a00, a01, a10, a11}.
  static DenseTensor matrix2(Complex a00, Complex a01, Complex a10, Complex a11);

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<std::int64_t>& shape() const { return shape_; }
  std::int64_t dim(int axis) const;
  std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

  std::span<Complex> data() { return data_; }
  std::span<const Complex> data() const { return data_; }

  Complex& at(std::span<const std::int64_t> index);
  const Complex& at(std::span<const std::int64_t> index) const;
  Complex& at(std::initializer_list<std::int64_t> index);
  const Complex& at(std::initializer_list<std::int64_t> index) const;

  /// Same data, new index structure; element count must be unchanged.
  DenseTensor reshaped(std::vector<std::int64_t> new_shape) const;
  /// axes[i] names the input axis that becomes output axis i.
  DenseTensor permuted(std::span<const int> axes) const;
  DenseTensor permuted(std::initializer_list<int> axes) const;
  DenseTensor conjugated() const;
  DenseTensor scaled(Complex factor) const;

  void scale(Complex factor);
  /// Frobenius norm.
  double norm() const;
  double norm_squared() const;

 private:
  std::vector<std::int64_t> shape_;
  std::vector<Complex> data_;
};

/// Pairwise tensor contraction. Each pair (i, j) sums axis i of `a`
/// against axis j of `b`; the paired dimensions must match. The result
/// carries the free axes of `a` (in order) followed by the free axes of
/// `b`.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const std::pair<int, int>> paired_axes);
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::initializer_list<std::pair<int, int>> paired_axes);

DenseTensor add(const DenseTensor& a, const DenseTensor& b);

}  // namespace tjm
