#pragma once

#include <string>
#include <vector>

#include "tjm/config.hpp"
#include "tjm/ensemble.hpp"

namespace tjm {

/// Thrown when output files cannot be created or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunArtifacts {
  std::vector<std::string> files;  // paths written
  double wall_seconds = 0.0;
  int n_traj = 0;
  long coarse_dp_warnings = 0;
  bool coarse_grid_warning = false;  // per-step jump intensity above 0.1
  int n_failed = 0;
};

/// Executes the configured simulation (trajectory ensemble or dense
/// master solve) and writes observables.csv, martingale.csv, jumps.csv
/// and run.json into `out_dir` (created if missing). CSV output is
/// locale independent with fixed scientific formatting and exactly the
/// documented header rows.
RunArtifacts run(const SimConfig& config, const std::string& out_dir);

}  // namespace tjm
