#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "tjm/mpo.hpp"
#include "tjm/mps.hpp"
#include "tjm/noise.hpp"
#include "tjm/rng.hpp"

namespace tjm {

/// Role of the j-th factor in the step-wise split of the no-jump
/// propagator over n steps: the run opens with a lone half-step
/// dissipator, bulk factors combine a full-step dissipator with the
/// unitary, and the terminal factor closes the remaining half step.
struct StepOperators {
  enum class Role { First, Bulk, Last };
  Role role;
  bool has_unitary;          // U(dt) applied before the dissipator
  double dissipation_span;   // dt/2 or dt
  double t_mid;              // rate evaluation time (midpoint of the span)
};

/// j = 0 is the opening half-step; j = 1..n-1 bulk; j = n terminal.
StepOperators step_operators(int step_index, int n_steps, double dt);

/// Test instrumentation knobs; defaults leave the physics untouched.
struct StepperTweaks {
  double jump_ratio_scale = 1.0;  // multiplies the martingale jump ratio
  int trotter_order = 2;          // 1 selects the plain U-then-D split
  bool disable_jumps = false;     // deterministic no-jump propagation
};

enum class InitialState { AllZeros, AllPlus };

/// Shared, immutable description of one simulation: Hamiltonian, noise
/// model, discretization and sampling layout. Built once and read
/// concurrently by all trajectory workers.
struct SimContext {
  int n_sites = 1;
  double j_coupling = 1.0;
  double g_field = 0.5;
  MpOperator hamiltonian = MpOperator::tfi(1, 1.0, 0.5);

  std::vector<NoiseChannel> channels;   // expanded, site-major
  std::vector<ChannelKind> kinds;       // template order
  std::vector<RateSchedule> kind_schedules;
  double channel_norm = 1.0;            // shared completeness factor c

  double dt = 1e-3;
  int n_steps = 1;
  std::int64_t chi_max = 4;
  double svd_threshold = 1e-10;

  InitialState initial_state = InitialState::AllZeros;
  int sample_stride = 1;
  bool measure_z = false;
  std::vector<int> sample_sites;  // empty = all sites

  StepperTweaks tweaks;

  struct Rates {
    std::vector<double> gamma;  // per kind
    std::vector<double> rate;   // gamma + shift
    double shift = 0.0;         // C_t
  };
  Rates rates_at(double t) const;

  /// Largest per-step total jump intensity over the run; above ~0.1 the
  /// one-jump-per-step approximation is questionable.
  double max_step_jump_intensity() const;

  MpsState initial_mps() const;
  std::vector<int> resolved_sample_sites() const;
};

struct JumpEvent {
  int step;
  int channel;  // index into SimContext::channels
};

/// Auxiliary trajectory state: the half-step-offset carrier MPS, the
/// martingale weight, the jump log and the private random stream.
struct TrajectoryState {
  MpsState phi;
  double mu = 1.0;
  double t = 0.0;
  std::vector<JumpEvent> jump_log;
  RandomStream rng;
};

/// Per-trajectory output on the sampling grid.
struct TrajectorySamples {
  std::vector<double> times;
  std::vector<double> mu;
  std::vector<std::vector<double>> x;  // [sample][measured site]
  std::vector<std::vector<double>> z;  // empty unless requested
  std::vector<double> norm2;           // carrier norm before entry renorm
  std::vector<JumpEvent> jumps;
  int coarse_dp_warnings = 0;
};

/// Applies the no-jump factor F_j: entry renormalization, the TDVP
/// unitary when the role carries one, then the site-local dissipators at
/// the midpoint rates. Returns the resulting squared norm (1 - delta_p).
double no_jump_step(TrajectoryState& ts, int step_index, const SimContext& ctx);

/// delta_p from the norm deficit of a no-jump factor applied to a
/// normalized state. Throws on delta_p < -1e-12; sets the warning flag
/// when the step is too coarse for one-jump-per-step sampling.
double jump_probability(double before_norm2, double after_norm2,
                        bool* coarse_warning = nullptr);

/// Jump decision for this step: nothing with probability 1 - delta_p,
/// otherwise a channel drawn proportionally to r_k c_k^2 <L^dag L>.
std::optional<int> sample_jump(TrajectoryState& ts, double epsilon, double delta_p,
                               const SimContext& ctx, const StepOperators& so);

/// Applies the selected channel operator at its site, renormalizes and
/// logs the event.
void apply_jump(TrajectoryState& ts, int channel, int step_index, const SimContext& ctx);

/// Martingale update for one step: continuous factor exp(C_t * span),
/// then the discrete ratio gamma_k / r_k when a jump fired.
void martingale_step(TrajectoryState& ts, const std::optional<int>& jump,
                     const SimContext& ctx, const StepOperators& so);

/// Runs one full trajectory; output is a pure function of (ctx, seed,
/// index).
TrajectorySamples run_trajectory(const SimContext& ctx, std::uint64_t base_seed,
                                 std::uint32_t trajectory_index);

}  // namespace tjm
