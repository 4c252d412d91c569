#pragma once

#include <vector>

#include "tjm/mpo.hpp"
#include "tjm/mps.hpp"

namespace tjm {

/// Per-site MPS†-MPO-MPS contraction blocks. left[k] covers sites
/// strictly left of k, right[k] sites strictly right of k; both have
/// index order (bra bond, MPO bond, ket bond) with 1x1x1 boundaries.
struct EnvironmentStack {
  std::vector<DenseTensor> left;
  std::vector<DenseTensor> right;
};

/// Full environment stacks for the state as currently gauged.
EnvironmentStack build_environments(const MpsState& s, const MpOperator& h);

/// Normalized expectation <psi|H|psi> / <psi|psi> by transfer-matrix
/// contraction (gauge independent).
Complex expect_mpo(const MpsState& s, const MpOperator& h);

enum class SweepMode { OneSite, TwoSite };

/// One symmetric TDVP time step exp(-i H dt): a forward sweep evolving
/// each local tensor by dt/2 (with the interleaving bond/site tensors
/// evolved backward by dt/2), then the mirrored backward sweep. OneSite
/// keeps bond dimensions fixed and preserves the norm; TwoSite lets bonds
/// grow up to chi_max with relative-threshold SVD truncation, rescaled so
/// truncation never changes the norm.
void tdvp_sweep(MpsState& s, const MpOperator& h, double dt, SweepMode mode,
                std::int64_t chi_max, double threshold);

/// Two-site sweeps while the largest bond is below chi_max, one-site
/// afterwards; the choice is re-evaluated on every call.
void dynamic_step(MpsState& s, const MpOperator& h, double dt,
                  std::int64_t chi_max, double threshold);

}  // namespace tjm
