#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "tjm/trajectory.hpp"

namespace tjm {
namespace validation {

/// Outcome of one acceptance check. `observed` and `bound` are in the
/// check's own units (documented in `detail`); pass means observed is
/// inside the bound.
struct CheckReport {
  std::string id;
  double observed = 0.0;
  double bound = 0.0;
  bool pass = false;
  double runtime_seconds = 0.0;
  std::string detail;
};

/// Quick runs N <= 3 with at most 500 trajectories; Full runs the
/// complete criteria list. All statistical checks use fixed seeds.
enum class Scale { Quick, Full };

CheckReport check_dephasing_coherence(Scale scale);
CheckReport check_martingale_mean(Scale scale, const StepperTweaks& tweaks = {});
CheckReport check_oracle_equivalence(Scale scale, bool markovian);
CheckReport check_trotter_order(Scale scale, int trotter_order = 2);
CheckReport check_tdvp_exactness(Scale scale);
CheckReport check_completeness_and_trace(Scale scale);
CheckReport check_jump_statistics(Scale scale);
CheckReport check_site_profiles(Scale scale);
CheckReport check_scalability(Scale scale);

/// Runs every acceptance check in order, streaming one pass/fail line per
/// check to `log` when given.
std::vector<CheckReport> run_all(Scale scale, std::ostream* log = nullptr);

/// One JSON record per check.
void write_report_json(const std::vector<CheckReport>& reports, const std::string& path);

void print_summary(const std::vector<CheckReport>& reports, std::ostream& out);

}  // namespace validation
}  // namespace tjm
