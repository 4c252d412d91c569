#pragma once

#include <cstdint>
#include <vector>

#include "tjm/noise.hpp"
#include "tjm/trajectory.hpp"

namespace tjm {
namespace oracle {

/// Dense density matrix snapshot series from the brute-force master
/// equation integrator. Matrices are row-major, dimension 2^N.
struct MasterSeries {
  int n_sites = 0;
  std::int64_t dim = 0;
  std::vector<double> times;
  std::vector<std::vector<Complex>> rho;
  double max_trace_drift = 0.0;
  std::vector<double> min_eigenvalues;  // per snapshot, reported not enforced
};

/// Dense Hamiltonian -J sum ZZ - g sum X as a 2^N x 2^N row-major matrix,
/// built directly from Kronecker products (independent of the MPO path).
std::vector<Complex> dense_tfi(int n_sites, double j_coupling, double g_field);

/// Dense initial state vector for a context.
std::vector<Complex> dense_initial_state(const SimContext& ctx);

/// Classical RK4 integration of the time-local master equation
///   d rho/dt = -i[H, rho] + sum_k gamma_k(t) (A rho A^dag - {A^dag A, rho}/2)
/// with the normalized channel operators. Rates are evaluated exactly at
/// the RK4 stage times; each trajectory step is subdivided `substeps`
/// times. Snapshots land on the sampling grid (stride) plus both
/// endpoints. Capped at N <= 6.
MasterSeries integrate_master(const SimContext& ctx, int substeps = 10);

/// Same integrator from an explicit initial density matrix (row-major,
/// dimension 2^N).
MasterSeries integrate_master_from(const SimContext& ctx, const std::vector<Complex>& rho0,
                                   int substeps = 10);

/// tr(rho X_site) at one snapshot.
double master_expect_x(const MasterSeries& series, int snapshot, int site);
double master_expect_z(const MasterSeries& series, int snapshot, int site);
Complex master_coherence(const MasterSeries& series, int snapshot);  // <0|rho|1>, N = 1

/// Dense state-vector mirror of the tensor-network trajectory stepper:
/// identical Trotter splitting, rate evaluation times and random-stream
/// discipline, so ensemble-level disagreements isolate tensor-network
/// error. Capped at N <= 12.
TrajectorySamples dense_trajectory(const SimContext& ctx, std::uint64_t base_seed,
                                   std::uint32_t trajectory_index);

}  // namespace oracle
}  // namespace tjm
