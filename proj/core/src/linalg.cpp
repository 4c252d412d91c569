#include "tjm/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tjm {

namespace {

using MatrixRM =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorC = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

struct MatrixView {
  std::int64_t rows = 1;
  std::int64_t cols = 1;
  std::vector<std::int64_t> row_dims;
  std::vector<std::int64_t> col_dims;
};

MatrixView split_view(const DenseTensor& t, int split_axis) {
  if (split_axis < 0 || split_axis > t.rank()) {
    throw std::invalid_argument("split axis out of range");
  }
  MatrixView v;
  for (int i = 0; i < split_axis; ++i) {
    v.rows *= t.dim(i);
    v.row_dims.push_back(t.dim(i));
  }
  for (int i = split_axis; i < t.rank(); ++i) {
    v.cols *= t.dim(i);
    v.col_dims.push_back(t.dim(i));
  }
  return v;
}

DenseTensor from_matrix(const MatrixRM& m, std::vector<std::int64_t> shape) {
  std::vector<Complex> data(m.data(), m.data() + m.size());
  return DenseTensor(std::move(shape), std::move(data));
}

double one_norm(const DenseTensor& a) {
  const std::int64_t n = a.dim(0);
  double best = 0.0;
  for (std::int64_t j = 0; j < n; ++j) {
    double col = 0.0;
    for (std::int64_t i = 0; i < n; ++i) col += std::abs(a.data()[i * n + j]);
    best = std::max(best, col);
  }
  return best;
}

bool is_hermitian(const DenseTensor& a, double tol) {
  const std::int64_t n = a.dim(0);
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = i; j < n; ++j) {
      if (std::abs(a.data()[i * n + j] - std::conj(a.data()[j * n + i])) > tol) {
        return false;
      }
    }
  }
  return true;
}

// exp(scale * h) v by plain Taylor summation; valid when |scale| * |h| is
// small enough that the series converges in a few dozen terms.
DenseTensor taylor_apply(const DenseTensor& h, const DenseTensor& v, Complex scale) {
  const std::int64_t n = h.dim(0);
  Eigen::Map<const MatrixRM> mh(h.data().data(), n, n);
  VectorC term(n), tmp(n), acc(n);
  for (std::int64_t i = 0; i < n; ++i) term[i] = v.data()[i];
  acc = term;
  const double target2 = 1e-30 * std::max(1.0, acc.squaredNorm());
  for (int k = 1; k <= 40; ++k) {
    tmp.noalias() = mh * term;
    term = (scale / static_cast<double>(k)) * tmp;
    acc += term;
    if (term.squaredNorm() < target2) break;
  }
  std::vector<Complex> out(acc.data(), acc.data() + n);
  return DenseTensor(v.shape(), std::move(out));
}

DenseTensor eigh_apply(const DenseTensor& h, const DenseTensor& v, Complex scale) {
  const std::int64_t n = h.dim(0);
  Eigen::Map<const MatrixRM> mh(h.data().data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mh);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("expm_apply: eigendecomposition failed");
  }
  Eigen::Map<const VectorC> mv(v.data().data(), n);
  VectorC coeff = es.eigenvectors().adjoint() * mv;
  for (std::int64_t i = 0; i < n; ++i) {
    coeff[i] *= std::exp(scale * es.eigenvalues()[i]);
  }
  VectorC out = es.eigenvectors() * coeff;
  std::vector<Complex> data(out.data(), out.data() + n);
  return DenseTensor(v.shape(), std::move(data));
}

// Hermitian Lanczos with full reorthogonalization (the Krylov dimensions
// in play are tiny). Returns false when the residual estimate stays above
// tolerance so the caller can fall back to a dense solve.
bool lanczos_apply(const DenseTensor& h, const DenseTensor& v, Complex scale,
                   DenseTensor& result) {
  constexpr int kMaxKrylov = 16;
  constexpr double kTol = 1e-12;
  const std::int64_t n = h.dim(0);
  Eigen::Map<const MatrixRM> mh(h.data().data(), n, n);
  Eigen::Map<const VectorC> mv(v.data().data(), n);

  const double vnorm = mv.norm();
  if (vnorm == 0.0) {
    result = v;
    return true;
  }

  std::vector<VectorC> basis;
  basis.push_back(mv / vnorm);
  std::vector<double> alpha, beta;
  const int m_max = static_cast<int>(std::min<std::int64_t>(kMaxKrylov, n));

  auto krylov_exp = [&](int m, double* tail) -> Eigen::VectorXcd {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      t(i, i) = alpha[i];
      if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t);
    Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(m);
    e1[0] = 1.0;
    Eigen::VectorXcd coeff = es.eigenvectors().transpose() * e1;
    for (int i = 0; i < m; ++i) coeff[i] *= std::exp(scale * es.eigenvalues()[i]);
    Eigen::VectorXcd small = es.eigenvectors() * coeff;
    if (tail) *tail = std::abs(small[m - 1]);
    return small;
  };

  bool breakdown = false;
  for (int j = 0; j < m_max; ++j) {
    VectorC w = mh * basis[j];
    Complex a = basis[j].dot(w);
    alpha.push_back(a.real());
    w -= a * basis[j];
    if (j > 0) w -= Complex(beta[j - 1]) * basis[j - 1];
    for (const auto& q : basis) w -= q.dot(w) * q;
    const double b = w.norm();
    if (b < 1e-14 * one_norm(h)) {
      breakdown = true;  // invariant subspace; Krylov result is exact
      break;
    }
    beta.push_back(b);
    basis.push_back(w / b);
  }

  const int m = static_cast<int>(alpha.size());
  double tail = 0.0;
  Eigen::VectorXcd small = krylov_exp(m, &tail);
  const double residual = breakdown || m == static_cast<int>(n)
                              ? 0.0
                              : beta[m - 1] * tail;
  if (residual > kTol * std::max(1.0, vnorm)) return false;

  VectorC out = VectorC::Zero(n);
  for (int i = 0; i < m; ++i) out += small[i] * basis[i];
  out *= vnorm;
  std::vector<Complex> data(out.data(), out.data() + n);
  result = DenseTensor(v.shape(), std::move(data));
  return true;
}

}  // namespace

std::pair<DenseTensor, DenseTensor> factorize_bond(const DenseTensor& t,
                                                   int split_axis,
                                                   FactorSide direction) {
  const MatrixView view = split_view(t, split_axis);
  Eigen::Map<const MatrixRM> m(t.data().data(), view.rows, view.cols);
  const std::int64_t k = std::min(view.rows, view.cols);

  if (direction == FactorSide::Left) {
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    MatrixRM q = qr.householderQ() * Eigen::MatrixXcd::Identity(view.rows, k);
    MatrixRM r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    auto q_shape = view.row_dims;
    q_shape.push_back(k);
    auto r_shape = view.col_dims;
    r_shape.insert(r_shape.begin(), k);
    return {from_matrix(q, std::move(q_shape)), from_matrix(r, std::move(r_shape))};
  }

  // LQ via QR of the adjoint: t = (Q̃ R̃)† over t† gives t = R̃† Q̃†.
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m.adjoint());
  MatrixRM qt = qr.householderQ() * Eigen::MatrixXcd::Identity(view.cols, k);
  MatrixRM rt = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  MatrixRM l = rt.adjoint();   // rows x k
  MatrixRM q = qt.adjoint();   // k x cols, orthonormal rows
  auto l_shape = view.row_dims;
  l_shape.push_back(k);
  auto q_shape = view.col_dims;
  q_shape.insert(q_shape.begin(), k);
  return {from_matrix(l, std::move(l_shape)), from_matrix(q, std::move(q_shape))};
}

SvdSplit svd_truncate(const DenseTensor& t, int split_axis,
                      std::int64_t chi_max, double threshold) {
  if (chi_max < 1) throw std::invalid_argument("svd_truncate: chi_max must be >= 1");
  if (threshold < 0) throw std::invalid_argument("svd_truncate: threshold must be >= 0");

  const MatrixView view = split_view(t, split_axis);
  Eigen::Map<const MatrixRM> m(t.data().data(), view.rows, view.cols);
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const std::int64_t full = sv.size();

  const double cutoff = full > 0 ? threshold * sv[0] : 0.0;
  std::int64_t keep = 0;
  for (std::int64_t i = 0; i < full; ++i) {
    if (sv[i] > cutoff) ++keep;
  }
  keep = std::max<std::int64_t>(1, std::min(keep, chi_max));

  double discarded = 0.0;
  for (std::int64_t i = keep; i < full; ++i) discarded += sv[i] * sv[i];

  SvdSplit out;
  out.singular_values.assign(sv.data(), sv.data() + keep);
  out.discarded_weight = discarded;

  MatrixRM u = svd.matrixU().leftCols(keep);
  MatrixRM vt = svd.matrixV().leftCols(keep).adjoint();
  auto u_shape = view.row_dims;
  u_shape.push_back(keep);
  auto v_shape = view.col_dims;
  v_shape.insert(v_shape.begin(), keep);
  out.left = from_matrix(u, std::move(u_shape));
  out.right = from_matrix(vt, std::move(v_shape));
  return out;
}

DenseTensor expm_apply(const DenseTensor& h, const DenseTensor& v, Complex scale) {
  if (h.rank() != 2 || h.dim(0) != h.dim(1)) {
    throw std::invalid_argument("expm_apply: h must be a square matrix");
  }
  if (v.size() != h.dim(0)) {
    throw std::invalid_argument("expm_apply: dimension mismatch between h and v");
  }
  if (scale == Complex(0.0)) return v;

  const double gnorm = std::abs(scale) * one_norm(h);
  if (gnorm <= 0.5) return taylor_apply(h, v, scale);

  // Splitting off the mean diagonal often collapses the generator norm
  // (local effective Hamiltonians carry an extensive environment energy
  // on the diagonal): exp(s h) v = e^{s mu} exp(s (h - mu I)) v.
  {
    const std::int64_t n = h.dim(0);
    Complex mu = 0.0;
    for (std::int64_t i = 0; i < n; ++i) mu += h.data()[i * n + i];
    mu /= static_cast<double>(n);
    if (mu != Complex(0.0)) {
      DenseTensor shifted = h;
      for (std::int64_t i = 0; i < n; ++i) shifted.data()[i * n + i] -= mu;
      if (std::abs(scale) * one_norm(shifted) <= 0.5) {
        DenseTensor out = taylor_apply(shifted, v, scale);
        out.scale(std::exp(scale * mu));
        return out;
      }
    }
  }

  const double htol = 1e-12 * std::max(1.0, one_norm(h));
  if (is_hermitian(h, htol)) {
    if (h.dim(0) <= 64) return eigh_apply(h, v, scale);
    DenseTensor result;
    if (lanczos_apply(h, v, scale, result)) return result;
    return eigh_apply(h, v, scale);
  }

  const DenseTensor e = expm_dense(h, scale);
  return contract(e, v.reshaped({v.size()}), {{1, 0}}).reshaped(v.shape());
}

DenseTensor expm_dense(const DenseTensor& a, Complex scale) {
  if (a.rank() != 2 || a.dim(0) != a.dim(1)) {
    throw std::invalid_argument("expm_dense: input must be a square matrix");
  }
  const std::int64_t n = a.dim(0);
  Eigen::Map<const MatrixRM> ma(a.data().data(), n, n);

  const double norm = std::abs(scale) * one_norm(a);
  int squarings = 0;
  double factor = 1.0;
  if (norm > 0.25) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / 0.25)));
    factor = std::ldexp(1.0, -squarings);
  }

  MatrixRM x = (scale * factor) * ma;
  MatrixRM acc = MatrixRM::Identity(n, n);
  MatrixRM term = MatrixRM::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = (term * x).eval() / static_cast<double>(k);
    acc += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) acc = (acc * acc).eval();

  std::vector<Complex> data(acc.data(), acc.data() + n * n);
  return DenseTensor({n, n}, std::move(data));
}

std::pair<std::vector<double>, DenseTensor> eigh(const DenseTensor& h) {
  if (h.rank() != 2 || h.dim(0) != h.dim(1)) {
    throw std::invalid_argument("eigh: input must be a square matrix");
  }
  const std::int64_t n = h.dim(0);
  Eigen::Map<const MatrixRM> mh(h.data().data(), n, n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mh);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigh: solver failed");
  std::vector<double> vals(es.eigenvalues().data(), es.eigenvalues().data() + n);
  MatrixRM vecs = es.eigenvectors();
  std::vector<Complex> data(vecs.data(), vecs.data() + n * n);
  return {std::move(vals), DenseTensor({n, n}, std::move(data))};
}

}  // namespace tjm
