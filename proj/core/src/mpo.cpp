#include "tjm/mpo.hpp"

#include <stdexcept>

namespace tjm {

namespace {

void put(DenseTensor& w, std::int64_t wl, std::int64_t wr, const DenseTensor& op,
         Complex factor = 1.0) {
  for (std::int64_t i = 0; i < 2; ++i) {
    for (std::int64_t j = 0; j < 2; ++j) {
      w.at({wl, i, j, wr}) = factor * op.at({i, j});
    }
  }
}

}  // namespace

DenseTensor pauli_x() { return DenseTensor::matrix2(0, 1, 1, 0); }
DenseTensor pauli_y() {
  return DenseTensor::matrix2(0, Complex(0, -1), Complex(0, 1), 0);
}
DenseTensor pauli_z() { return DenseTensor::matrix2(1, 0, 0, -1); }

MpOperator MpOperator::tfi(int n_sites, double j_coupling, double g_field) {
  if (n_sites < 1) throw std::invalid_argument("tfi: need at least one site");
  const DenseTensor id = DenseTensor::identity(2);
  const DenseTensor x = pauli_x();
  const DenseTensor z = pauli_z();

  if (n_sites == 1) {
    DenseTensor w({1, 2, 2, 1});
    put(w, 0, 0, x, -g_field);
    return MpOperator({w});
  }

  // Transfer layout [[I,0,0],[Z,0,0],[-gX,-JZ,I]]; the first site takes
  // the bottom row, the last site the first column.
  std::vector<DenseTensor> sites;
  sites.reserve(n_sites);

  DenseTensor first({1, 2, 2, 3});
  put(first, 0, 0, x, -g_field);
  put(first, 0, 1, z, -j_coupling);
  put(first, 0, 2, id);
  sites.push_back(std::move(first));

  for (int k = 1; k + 1 < n_sites; ++k) {
    DenseTensor bulk({3, 2, 2, 3});
    put(bulk, 0, 0, id);
    put(bulk, 1, 0, z);
    put(bulk, 2, 0, x, -g_field);
    put(bulk, 2, 1, z, -j_coupling);
    put(bulk, 2, 2, id);
    sites.push_back(std::move(bulk));
  }

  DenseTensor last({3, 2, 2, 1});
  put(last, 0, 0, id);
  put(last, 1, 0, z);
  put(last, 2, 0, x, -g_field);
  sites.push_back(std::move(last));

  return MpOperator(std::move(sites));
}

MpOperator MpOperator::identity(int n_sites) {
  if (n_sites < 1) throw std::invalid_argument("identity: need at least one site");
  std::vector<DenseTensor> sites;
  for (int k = 0; k < n_sites; ++k) {
    DenseTensor w({1, 2, 2, 1});
    put(w, 0, 0, DenseTensor::identity(2));
    sites.push_back(std::move(w));
  }
  return MpOperator(std::move(sites));
}

std::int64_t MpOperator::max_bond_dim() const {
  std::int64_t best = 1;
  for (const auto& t : sites_) best = std::max(best, t.dim(3));
  return best;
}

DenseTensor MpOperator::to_dense(int max_sites) const {
  const int n = n_sites();
  if (n > max_sites) throw std::invalid_argument("to_dense: chain longer than the dense cap");

  // acc has shape (D_out, D_in, w); absorb one site at a time.
  DenseTensor acc = sites_[0].reshaped({2, 2, sites_[0].dim(3)});
  for (int k = 1; k < n; ++k) {
    acc = contract(acc, sites_[k], {{2, 0}});           // (D', D, s', s, w)
    acc = acc.permuted({0, 2, 1, 3, 4});                // (D', s', D, s, w)
    const std::int64_t d = acc.dim(0) * 2;
    acc = acc.reshaped({d, d, acc.dim(4)});
  }
  const std::int64_t d = acc.dim(0);
  return acc.reshaped({d, d});
}

}  // namespace tjm
