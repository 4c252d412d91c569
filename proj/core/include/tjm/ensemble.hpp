#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "tjm/trajectory.hpp"

namespace tjm {

/// Martingale-weighted ensemble statistics on the sampling grid.
struct EnsembleResult {
  std::vector<double> times;
  std::vector<int> sites;  // measured sites in output order

  // [time][site] weighted mean / standard error of <X_i> (and <Z_i> when
  // requested).
  std::vector<std::vector<double>> x_mean, x_stderr;
  std::vector<std::vector<double>> z_mean, z_stderr;

  std::vector<double> mu_mean, mu_var;  // per time

  // Jump counts per (channel kind, time bin); bins are sample_stride
  // steps wide, indexed from t = 0.
  std::map<ChannelKind, std::vector<long>> jump_counts;
  int bin_width_steps = 1;
  double bin_width_time = 0.0;

  int n_traj = 0;
  long coarse_dp_warnings = 0;

  struct Failure {
    std::uint32_t index;
    std::uint64_t base_seed;
    std::string message;
  };
  std::vector<Failure> failures;  // excluded from statistics

  // Per-trajectory samples in index order, kept only on request.
  std::vector<TrajectorySamples> raw;
};

enum class TrajectoryBackend { TensorNetwork, DenseStateVector };

struct EnsembleOptions {
  int n_traj = 1;
  std::uint64_t base_seed = 1;
  int workers = 0;  // <= 0 picks hardware concurrency
  TrajectoryBackend backend = TrajectoryBackend::TensorNetwork;
  bool keep_raw = false;  // retain per-trajectory samples in the result
};

/// Runs independent trajectories with seeds (base_seed, index) across a
/// worker pool and merges them by trajectory index, so the result is
/// bit-identical for any worker count or scheduling order. Faulted
/// trajectories are recorded and excluded rather than resampled.
EnsembleResult run_ensemble(const SimContext& ctx, const EnsembleOptions& opts);

/// Martingale-weighted estimator: mean of {mu_i v_i} and the i.i.d.
/// standard error (sample standard deviation / sqrt(M)).
std::pair<double, double> weighted_observable(
    std::span<const std::pair<double, double>> mu_value);

/// Jump counts per (kind, bin) from raw trajectory logs; bins are
/// `bin_steps` trajectory steps wide.
std::map<ChannelKind, std::vector<long>> jump_histogram(
    const std::vector<std::vector<JumpEvent>>& logs, const SimContext& ctx,
    int bin_steps);

}  // namespace tjm
