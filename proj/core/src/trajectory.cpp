#include "tjm/trajectory.hpp"

#include <cmath>
#include <stdexcept>

#include "tjm/linalg.hpp"
#include "tjm/tdvp.hpp"

namespace tjm {

namespace {

// F_j^{no-jump} for an already entry-normalized state: the unitary (when
// the role carries one) followed by the site-local dissipator factors at
// the midpoint rates.
void apply_no_jump_factor(TrajectoryState& ts, const StepOperators& so,
                          const SimContext& ctx) {
  if (so.has_unitary) {
    dynamic_step(ts.phi, ctx.hamiltonian, ctx.dt, ctx.chi_max, ctx.svd_threshold);
  }
  if (!ctx.channels.empty() && so.dissipation_span > 0.0) {
    const auto rates = ctx.rates_at(so.t_mid);
    // Uniform noise model: the same site factor applies at every site.
    const DenseTensor d = dissipator_site_factor(
        std::span(ctx.channels).first(ctx.kinds.size()), rates.rate, so.dissipation_span);
    for (int site = 0; site < ctx.n_sites; ++site) ts.phi.apply_local(site, d, false);
  }
}

// Measures <X_i> (and optionally <Z_i>) on a normalized copy advanced by
// the deterministic terminal correction D(dt/2) U(dt); the stored
// trajectory state is untouched.
void record_sample(const TrajectoryState& ts, const SimContext& ctx, double t,
                   bool needs_correction, TrajectorySamples& out) {
  MpsState copy = ts.phi;
  out.norm2.push_back(copy.norm_squared());
  copy.normalize();
  if (needs_correction) {
    dynamic_step(copy, ctx.hamiltonian, ctx.dt, ctx.chi_max, ctx.svd_threshold);
    if (!ctx.channels.empty()) {
      const auto rates = ctx.rates_at(t - 0.25 * ctx.dt);
      const DenseTensor d = dissipator_site_factor(
          std::span(ctx.channels).first(ctx.kinds.size()), rates.rate, 0.5 * ctx.dt);
      for (int site = 0; site < ctx.n_sites; ++site) copy.apply_local(site, d, false);
    }
    copy.normalize();
  }

  auto rhos = copy.local_density_matrices();
  const DenseTensor x = pauli_x();
  const DenseTensor z = pauli_z();
  std::vector<double> xs, zs;
  for (int site : ctx.resolved_sample_sites()) {
    const DenseTensor& rho = rhos[site];
    Complex ex = 0.0, ez = 0.0;
    for (std::int64_t i = 0; i < 2; ++i) {
      for (std::int64_t j = 0; j < 2; ++j) {
        ex += rho.at({i, j}) * x.at({j, i});
        ez += rho.at({i, j}) * z.at({j, i});
      }
    }
    xs.push_back(ex.real());
    if (ctx.measure_z) zs.push_back(ez.real());
  }
  out.times.push_back(t);
  out.mu.push_back(ts.mu);
  out.x.push_back(std::move(xs));
  if (ctx.measure_z) out.z.push_back(std::move(zs));
}

// Step plan honoring the trotter_order tweak: first order collapses to a
// plain U(dt)-then-D(dt) split with no opening half step.
StepOperators planned_step(int j, const SimContext& ctx) {
  StepOperators so = step_operators(j, ctx.n_steps, ctx.dt);
  if (ctx.tweaks.trotter_order == 1) {
    if (j == 0) {
      so.has_unitary = false;
      so.dissipation_span = 0.0;
      so.t_mid = 0.0;
    } else {
      so.role = StepOperators::Role::Bulk;
      so.has_unitary = true;
      so.dissipation_span = ctx.dt;
      so.t_mid = (j - 0.5) * ctx.dt;
    }
  }
  return so;
}

}  // namespace

StepOperators step_operators(int step_index, int n_steps, double dt) {
  if (step_index < 0 || step_index > n_steps) {
    throw std::invalid_argument("step_operators: step index out of range");
  }
  StepOperators so{};
  if (step_index == 0) {
    so.role = StepOperators::Role::First;
    so.has_unitary = false;
    so.dissipation_span = 0.5 * dt;
    so.t_mid = 0.25 * dt;
  } else if (step_index < n_steps) {
    so.role = StepOperators::Role::Bulk;
    so.has_unitary = true;
    so.dissipation_span = dt;
    so.t_mid = step_index * dt;
  } else {
    so.role = StepOperators::Role::Last;
    so.has_unitary = true;
    so.dissipation_span = 0.5 * dt;
    so.t_mid = n_steps * dt - 0.25 * dt;
  }
  return so;
}

SimContext::Rates SimContext::rates_at(double t) const {
  Rates r;
  r.gamma.reserve(kinds.size());
  for (const auto& sched : kind_schedules) r.gamma.push_back(gamma_at(sched, t));
  r.shift = rate_shift(r.gamma);
  r.rate = r.gamma;
  for (auto& v : r.rate) v += r.shift;
  return r;
}

double SimContext::max_step_jump_intensity() const {
  double worst = 0.0;
  for (int j = 0; j <= n_steps; ++j) {
    const StepOperators so = step_operators(j, n_steps, dt);
    const auto r = rates_at(so.t_mid);
    double total = 0.0;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      total += r.rate[k] * channel_norm * channel_norm * n_sites;
    }
    worst = std::max(worst, total * so.dissipation_span);
  }
  return worst;
}

MpsState SimContext::initial_mps() const {
  if (initial_state == InitialState::AllPlus) {
    return MpsState::uniform_product(n_sites, 1.0, 1.0);
  }
  return MpsState::from_product_state(std::vector<int>(n_sites, 0));
}

std::vector<int> SimContext::resolved_sample_sites() const {
  if (!sample_sites.empty()) return sample_sites;
  std::vector<int> all(n_sites);
  for (int i = 0; i < n_sites; ++i) all[i] = i;
  return all;
}

double no_jump_step(TrajectoryState& ts, int step_index, const SimContext& ctx) {
  const StepOperators so = planned_step(step_index, ctx);
  ts.phi.normalize();
  apply_no_jump_factor(ts, so, ctx);
  return ts.phi.norm_squared();
}

double jump_probability(double before_norm2, double after_norm2, bool* coarse_warning) {
  if (before_norm2 <= 0.0) throw std::runtime_error("jump_probability: zero entry norm");
  double dp = 1.0 - after_norm2 / before_norm2;
  if (dp < -1e-12) {
    throw std::runtime_error("jump_probability: negative norm deficit (integrator fault)");
  }
  dp = std::max(dp, 0.0);
  if (coarse_warning && dp > 0.1) *coarse_warning = true;
  return dp;
}

std::optional<int> sample_jump(TrajectoryState& ts, double epsilon, double delta_p,
                               const SimContext& ctx, const StepOperators& so) {
  if (epsilon >= delta_p || ctx.channels.empty()) return std::nullopt;

  const auto rates = ctx.rates_at(so.t_mid);
  auto rhos = ts.phi.local_density_matrices();

  const std::size_t n_kinds = ctx.kinds.size();
  std::vector<double> weights(ctx.channels.size());
  double total = 0.0;
  for (std::size_t c = 0; c < ctx.channels.size(); ++c) {
    const auto& ch = ctx.channels[c];
    const DenseTensor ldl = contract(ch.op.conjugated(), ch.op, {{0, 0}});
    Complex occ = 0.0;
    for (std::int64_t i = 0; i < 2; ++i) {
      for (std::int64_t j = 0; j < 2; ++j) {
        occ += rhos[ch.site].at({i, j}) * ldl.at({j, i});
      }
    }
    const double w =
        std::max(0.0, rates.rate[c % n_kinds] * ch.norm_factor * ch.norm_factor * occ.real());
    weights[c] = w;
    total += w;
  }
  if (total <= 0.0) {
    throw std::runtime_error(
        "sample_jump: jump requested but all channel weights vanish "
        "(numerical inconsistency)");
  }

  const double u = ts.rng.uniform() * total;
  double cum = 0.0;
  for (std::size_t c = 0; c < weights.size(); ++c) {
    cum += weights[c];
    if (u < cum) return static_cast<int>(c);
  }
  return static_cast<int>(weights.size()) - 1;
}

void apply_jump(TrajectoryState& ts, int channel, int step_index, const SimContext& ctx) {
  const auto& ch = ctx.channels.at(channel);
  ts.phi.apply_local(ch.site, ch.op, /*renormalize=*/true);
  ts.jump_log.push_back({step_index, channel});
}

void martingale_step(TrajectoryState& ts, const std::optional<int>& jump,
                     const SimContext& ctx, const StepOperators& so) {
  if (ctx.channels.empty()) return;
  const auto rates = ctx.rates_at(so.t_mid);
  if (rates.shift != 0.0) {
    ts.mu *= std::exp(rates.shift * so.dissipation_span);
  }
  if (jump) {
    const std::size_t kind_idx = *jump % ctx.kinds.size();
    const double r = rates.rate[kind_idx];
    if (r <= 0.0) {
      throw std::runtime_error("martingale_step: jump through a zero-rate channel");
    }
    double ratio = rates.gamma[kind_idx] / r;
    ratio *= ctx.tweaks.jump_ratio_scale;
    if (ratio != 1.0) ts.mu *= ratio;
  }
}

TrajectorySamples run_trajectory(const SimContext& ctx, std::uint64_t base_seed,
                                 std::uint32_t trajectory_index) {
  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  ts.rng = RandomStream(base_seed, trajectory_index);

  TrajectorySamples out;
  const int n = ctx.n_steps;
  const bool second_order = ctx.tweaks.trotter_order != 1;

  record_sample(ts, ctx, 0.0, /*needs_correction=*/false, out);

  auto run_step = [&](int j) {
    const StepOperators so = planned_step(j, ctx);
    ts.phi.normalize();
    apply_no_jump_factor(ts, so, ctx);

    bool coarse = false;
    const double dp = jump_probability(1.0, ts.phi.norm_squared(), &coarse);
    if (coarse) ++out.coarse_dp_warnings;

    std::optional<int> jump;
    if (!ctx.tweaks.disable_jumps && !ctx.channels.empty()) {
      const double eps = ts.rng.uniform();
      jump = sample_jump(ts, eps, dp, ctx, so);
      if (jump) apply_jump(ts, *jump, j, ctx);
    }
    martingale_step(ts, jump, ctx, so);
    ts.t = std::min((j + 0.5) * ctx.dt, n * ctx.dt);
  };

  run_step(0);
  for (int j = 1; j < n; ++j) {
    if (j % ctx.sample_stride == 0) {
      record_sample(ts, ctx, j * ctx.dt, /*needs_correction=*/second_order, out);
    }
    run_step(j);
  }
  run_step(n);
  record_sample(ts, ctx, n * ctx.dt, /*needs_correction=*/false, out);

  out.jumps = ts.jump_log;
  return out;
}

}  // namespace tjm
