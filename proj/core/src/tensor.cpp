#include "tjm/tensor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace tjm {

namespace {

std::int64_t checked_size(const std::vector<std::int64_t>& shape) {
  std::int64_t n = 1;
  for (std::int64_t d : shape) {
    if (d < 1) throw std::invalid_argument("DenseTensor: dimensions must be >= 1");
    n *= d;
  }
  return n;
}

std::vector<std::int64_t> row_major_strides(const std::vector<std::int64_t>& shape) {
  std::vector<std::int64_t> strides(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i) {
    strides[i] = strides[i + 1] * shape[i + 1];
  }
  return strides;
}

using MatrixRM =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

}  // namespace

DenseTensor::DenseTensor(std::vector<std::int64_t> shape)
    : shape_(std::move(shape)), data_(checked_size(shape_)) {}

DenseTensor::DenseTensor(std::vector<std::int64_t> shape, std::vector<Complex> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (checked_size(shape_) != static_cast<std::int64_t>(data_.size())) {
    throw std::invalid_argument("DenseTensor: data length does not match shape");
  }
}

DenseTensor DenseTensor::scalar(Complex value) {
  return DenseTensor({}, {value});
}

DenseTensor DenseTensor::identity(std::int64_t n) {
  DenseTensor t({n, n});
  for (std::int64_t i = 0; i < n; ++i) t.data_[i * n + i] = 1.0;
  return t;
}

DenseTensor DenseTensor::matrix2(Complex a00, Complex a01, Complex a10, Complex a11) {
  return DenseTensor({2, 2}, {a00, a01, a10, a11});
}

std::int64_t DenseTensor::dim(int axis) const {
  if (axis < 0 || axis >= rank()) throw std::invalid_argument("DenseTensor: axis out of range");
  return shape_[axis];
}

Complex& DenseTensor::at(std::span<const std::int64_t> index) {
  return const_cast<Complex&>(std::as_const(*this).at(index));
}

const Complex& DenseTensor::at(std::span<const std::int64_t> index) const {
  if (static_cast<int>(index.size()) != rank()) {
    throw std::invalid_argument("DenseTensor: index rank mismatch");
  }
  std::int64_t offset = 0;
  std::int64_t stride = 1;
  for (int i = rank() - 1; i >= 0; --i) {
    if (index[i] < 0 || index[i] >= shape_[i]) {
      throw std::out_of_range("DenseTensor: index out of range");
    }
    offset += index[i] * stride;
    stride *= shape_[i];
  }
  return data_[offset];
}

Complex& DenseTensor::at(std::initializer_list<std::int64_t> index) {
  return at(std::span<const std::int64_t>(index.begin(), index.size()));
}

const Complex& DenseTensor::at(std::initializer_list<std::int64_t> index) const {
  return at(std::span<const std::int64_t>(index.begin(), index.size()));
}

DenseTensor DenseTensor::reshaped(std::vector<std::int64_t> new_shape) const {
  if (checked_size(new_shape) != size()) {
    throw std::invalid_argument("DenseTensor: reshape changes element count");
  }
  return DenseTensor(std::move(new_shape), data_);
}

DenseTensor DenseTensor::permuted(std::span<const int> axes) const {
  if (static_cast<int>(axes.size()) != rank()) {
    throw std::invalid_argument("DenseTensor: permutation rank mismatch");
  }
  std::vector<bool> seen(axes.size(), false);
  std::vector<std::int64_t> new_shape(axes.size());
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] < 0 || axes[i] >= rank() || seen[axes[i]]) {
      throw std::invalid_argument("DenseTensor: invalid permutation");
    }
    seen[axes[i]] = true;
    new_shape[i] = shape_[axes[i]];
  }

  const auto in_strides = row_major_strides(shape_);
  DenseTensor out(new_shape);
  const std::int64_t n = size();
  const int r = rank();

  // Walk the output in order, updating the input offset incrementally as
  // the output odometer ticks.
  std::vector<std::int64_t> idx(r, 0);
  std::vector<std::int64_t> stride(r), rewind(r);
  for (int i = 0; i < r; ++i) {
    stride[i] = in_strides[axes[i]];
    rewind[i] = stride[i] * (new_shape[i] - 1);
  }
  std::int64_t in_offset = 0;
  for (std::int64_t flat = 0; flat < n; ++flat) {
    out.data_[flat] = data_[in_offset];
    for (int i = r - 1; i >= 0; --i) {
      if (++idx[i] < new_shape[i]) {
        in_offset += stride[i];
        break;
      }
      idx[i] = 0;
      in_offset -= rewind[i];
    }
  }
  return out;
}

DenseTensor DenseTensor::permuted(std::initializer_list<int> axes) const {
  return permuted(std::span<const int>(axes.begin(), axes.size()));
}

DenseTensor DenseTensor::conjugated() const {
  DenseTensor out(*this);
  for (auto& v : out.data_) v = std::conj(v);
  return out;
}

DenseTensor DenseTensor::scaled(Complex factor) const {
  DenseTensor out(*this);
  out.scale(factor);
  return out;
}

void DenseTensor::scale(Complex factor) {
  for (auto& v : data_) v *= factor;
}

double DenseTensor::norm() const { return std::sqrt(norm_squared()); }

double DenseTensor::norm_squared() const {
  double acc = 0.0;
  for (const auto& v : data_) acc += std::norm(v);
  return acc;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const std::pair<int, int>> paired_axes) {
  std::vector<bool> a_paired(a.rank(), false), b_paired(b.rank(), false);
  for (const auto& [ia, ib] : paired_axes) {
    if (ia < 0 || ia >= a.rank() || ib < 0 || ib >= b.rank()) {
      throw std::invalid_argument("contract: paired axis out of range");
    }
    if (a_paired[ia] || b_paired[ib]) {
      throw std::invalid_argument("contract: axis paired twice");
    }
    if (a.dim(ia) != b.dim(ib)) {
      throw std::invalid_argument(
          "contract: paired axes have different dimensions (" +
          std::to_string(a.dim(ia)) + " vs " + std::to_string(b.dim(ib)) + ")");
    }
    a_paired[ia] = true;
    b_paired[ib] = true;
  }

  std::vector<int> a_perm, b_perm;
  std::vector<std::int64_t> out_shape;
  std::int64_t m = 1, k = 1, n = 1;
  for (int i = 0; i < a.rank(); ++i) {
    if (!a_paired[i]) {
      a_perm.push_back(i);
      out_shape.push_back(a.dim(i));
      m *= a.dim(i);
    }
  }
  for (const auto& [ia, ib] : paired_axes) {
    a_perm.push_back(ia);
    b_perm.push_back(ib);
    k *= a.dim(ia);
  }
  for (int i = 0; i < b.rank(); ++i) {
    if (!b_paired[i]) {
      b_perm.push_back(i);
      out_shape.push_back(b.dim(i));
      n *= b.dim(i);
    }
  }

  // Skip the permuted copy when the axes already sit in matrix order
  // (free-then-paired for a, paired-then-free for b) -- the common case
  // in the sweep kernels.
  auto is_identity = [](const std::vector<int>& perm) {
    for (std::size_t i = 0; i < perm.size(); ++i) {
      if (perm[i] != static_cast<int>(i)) return false;
    }
    return true;
  };

  DenseTensor pa_store, pb_store;
  const Complex* pa = a.data().data();
  const Complex* pb = b.data().data();
  if (!is_identity(a_perm)) {
    pa_store = a.permuted(a_perm);
    pa = pa_store.data().data();
  }
  if (!is_identity(b_perm)) {
    pb_store = b.permuted(b_perm);
    pb = pb_store.data().data();
  }

  DenseTensor out(out_shape);
  Eigen::Map<const MatrixRM> ma(pa, m, k);
  Eigen::Map<const MatrixRM> mb(pb, k, n);
  Eigen::Map<MatrixRM> mo(out.data().data(), m, n);
  mo.noalias() = ma * mb;
  return out;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::initializer_list<std::pair<int, int>> paired_axes) {
  return contract(a, b,
                  std::span<const std::pair<int, int>>(paired_axes.begin(), paired_axes.size()));
}

DenseTensor add(const DenseTensor& a, const DenseTensor& b) {
  if (a.shape() != b.shape()) throw std::invalid_argument("add: shape mismatch");
  DenseTensor out(a);
  auto out_data = out.data();
  auto b_data = b.data();
  for (std::int64_t i = 0; i < out.size(); ++i) out_data[i] += b_data[i];
  return out;
}

}  // namespace tjm
