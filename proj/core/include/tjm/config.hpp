#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tjm/trajectory.hpp"

namespace tjm {

/// Configuration parse/validation failure; carries the 1-based source
/// position (0 when the error is semantic rather than syntactic) and the
/// offending field path.
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& message, int line_ = 0, int col_ = 0,
              std::string path_ = {})
      : std::runtime_error(message), line(line_), col(col_), path(std::move(path_)) {}
  int line;
  int col;
  std::string path;
};

enum class RunMode { Tjm, DenseTrajectory, DenseMaster };

struct NoiseSpec {
  ChannelKind kind;
  RateSchedule schedule;
  bool operator==(const NoiseSpec&) const = default;
};

/// Validated simulation configuration; mirrors the config-file schema
/// documented in the README.
struct SimConfig {
  RunMode mode = RunMode::Tjm;

  int n_sites = 1;
  double j_coupling = 1.0;
  double g_field = 0.5;

  double dt = 1e-3;
  int n_steps = 1;
  std::int64_t chi_max = 4;
  double svd_threshold = 1e-10;

  std::vector<NoiseSpec> noise;

  int n_traj = 1;
  std::uint64_t base_seed = 1;
  int workers = 0;  // 0 = hardware concurrency

  int sample_stride = 1;
  bool measure_z = false;
  std::vector<int> sample_sites;  // empty = all
  InitialState initial_state = InitialState::AllZeros;

  bool operator==(const SimConfig&) const = default;
};

/// Parses the key-value configuration text (TOML subset: [section]
/// tables, [[noise]] array tables, dotted keys, scalars and flat arrays).
/// Unknown sections or keys are rejected; all semantic constraints are
/// checked, including channel-set completeness.
SimConfig parse_config(std::string_view text);

/// Canonical serialization; parse_config(serialize_config(c)) == c.
std::string serialize_config(const SimConfig& config);

/// Semantic validation only (parse_config already runs it).
void validate_config(const SimConfig& config);

/// Builds the immutable runtime context (Hamiltonian MPO, normalized
/// channels, discretization) for a validated configuration.
SimContext make_context(const SimConfig& config);

std::string to_string(RunMode mode);

}  // namespace tjm
