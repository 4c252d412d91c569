#include <doctest.h>

#include <cmath>
#include <cstring>

#include "test_support.hpp"
#include "tjm/config.hpp"
#include "tjm/linalg.hpp"
#include "tjm/oracle.hpp"
#include "tjm/trajectory.hpp"

using namespace tjm;

namespace {

RateSchedule nm_schedule() {
  RateSchedule s;
  s.kind = RateSchedule::Kind::DampedOscillatory;
  s.gamma_inf = 8.24;
  s.amplitude = 12.0;
  s.omega = 7.5;
  s.f_cubic_coeff = 0.25;
  return s;
}

RateSchedule const_schedule(double g) {
  RateSchedule s;
  s.kind = RateSchedule::Kind::Constant;
  s.gamma_inf = g;
  return s;
}

SimContext make_ctx(int n, std::vector<NoiseSpec> noise, double dt, int steps) {
  SimConfig cfg;
  cfg.n_sites = n;
  cfg.j_coupling = 1.0;
  cfg.g_field = 0.5;
  cfg.dt = dt;
  cfg.n_steps = steps;
  cfg.chi_max = 8;
  cfg.noise = std::move(noise);
  return make_context(cfg);
}

}  // namespace

TEST_CASE("step_operators: split roles and spans") {
  const double dt = 0.002;
  const int n = 10;

  const StepOperators first = step_operators(0, n, dt);
  CHECK(first.role == StepOperators::Role::First);
  CHECK_FALSE(first.has_unitary);
  CHECK(first.dissipation_span == doctest::Approx(0.5 * dt));
  CHECK(first.t_mid == doctest::Approx(0.25 * dt));

  const StepOperators bulk = step_operators(4, n, dt);
  CHECK(bulk.role == StepOperators::Role::Bulk);
  CHECK(bulk.has_unitary);
  CHECK(bulk.dissipation_span == doctest::Approx(dt));
  CHECK(bulk.t_mid == doctest::Approx(4 * dt));

  const StepOperators last = step_operators(n, n, dt);
  CHECK(last.role == StepOperators::Role::Last);
  CHECK(last.has_unitary);
  CHECK(last.dissipation_span == doctest::Approx(0.5 * dt));

  // composition bookkeeping: spans sum to T, unitaries count n
  double span = 0.0;
  int unitaries = 0;
  for (int j = 0; j <= n; ++j) {
    const StepOperators so = step_operators(j, n, dt);
    span += so.dissipation_span;
    unitaries += so.has_unitary ? 1 : 0;
  }
  CHECK(span == doctest::Approx(n * dt));
  CHECK(unitaries == n);
}

TEST_CASE("jump_probability: zero for unitary steps, fault when negative") {
  CHECK(jump_probability(1.0, 1.0) == 0.0);
  CHECK(jump_probability(1.0, 0.99) == doctest::Approx(0.01));
  CHECK(jump_probability(1.0, 1.0 + 1e-14) == 0.0);  // roundoff clamp
  CHECK_THROWS_AS(jump_probability(1.0, 1.1), std::runtime_error);

  bool warn = false;
  CHECK(jump_probability(1.0, 0.8, &warn) == doctest::Approx(0.2));
  CHECK(warn);
}

TEST_CASE("no_jump_step: zero noise preserves the norm") {
  const SimContext ctx = make_ctx(3, {}, 1e-3, 10);
  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  for (int j = 0; j <= 3; ++j) {
    const double n2 = no_jump_step(ts, j, ctx);
    CHECK(std::abs(n2 - 1.0) < 1e-10);
  }
}

TEST_CASE("no_jump_step: single-qubit dephasing norm decay is the scalar law") {
  // bulk step: norm^2 multiplies by exp(-r dt) for dephasing at c^2 N = 1
  const SimContext ctx =
      make_ctx(1, {{ChannelKind::Dephasing, const_schedule(8.24)}}, 1e-3, 10);
  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  const double n2 = no_jump_step(ts, 3, ctx);  // bulk role
  CHECK(n2 == doctest::Approx(std::exp(-8.24 * 1e-3)).epsilon(1e-10));

  const double dp = jump_probability(1.0, n2);
  CHECK(dp == doctest::Approx(1.0 - std::exp(-0.00824)).epsilon(1e-10));
  CHECK(dp == doctest::Approx(0.00821).epsilon(1e-3));
}

TEST_CASE("no_jump_step: relaxation cannot trigger jumps from the ground state") {
  // The opening half-step sees |0...0> itself: sigma- annihilates it and
  // the excitation rate is zero, so no norm is lost at all.
  const SimContext ctx = make_ctx(
      2, {{ChannelKind::Excitation, const_schedule(0.0)},
          {ChannelKind::Relaxation, const_schedule(5.0)}},
      1e-3, 10);
  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  const double n2 = no_jump_step(ts, 0, ctx);
  CHECK(jump_probability(1.0, n2) < 1e-12);

  // With the transverse field switched off the chain stays in |00> and
  // bulk steps lose no norm either.
  SimConfig cfg;
  cfg.n_sites = 2;
  cfg.g_field = 0.0;
  cfg.dt = 1e-3;
  cfg.n_steps = 10;
  cfg.noise = {{ChannelKind::Excitation, const_schedule(0.0)},
               {ChannelKind::Relaxation, const_schedule(5.0)}};
  const SimContext frozen = make_context(cfg);
  TrajectoryState ts2;
  ts2.phi = frozen.initial_mps();
  const double n2_bulk = no_jump_step(ts2, 1, frozen);
  CHECK(jump_probability(1.0, n2_bulk) < 1e-12);
}

TEST_CASE("no_jump_step: halving dt shrinks the defect fourfold (second order)") {
  // deterministic no-jump propagation against dense exp(-i H_eff T)
  const double t_final = 0.1;
  auto terminal_error = [&](double dt) {
    SimConfig cfg;
    cfg.n_sites = 2;
    cfg.dt = dt;
    cfg.n_steps = static_cast<int>(std::llround(t_final / dt));
    cfg.chi_max = 4;
    cfg.noise = {{ChannelKind::Excitation, const_schedule(8.24)},
                 {ChannelKind::Relaxation, const_schedule(3.0)}};
    SimContext ctx = make_context(cfg);
    ctx.tweaks.disable_jumps = true;

    TrajectoryState ts;
    ts.phi = ctx.initial_mps();
    double log_amp = 0.0;
    for (int j = 0; j <= ctx.n_steps; ++j) {
      log_amp += 0.5 * std::log(ts.phi.norm_squared());
      no_jump_step(ts, j, ctx);
    }
    DenseTensor got = ts.phi.to_dense();
    got.scale(std::exp(log_amp));

    const auto h0 = oracle::dense_tfi(2, 1.0, 0.5);
    DenseTensor heff({4, 4}, h0);
    const double c2 = ctx.channel_norm * ctx.channel_norm;
    for (std::int64_t b = 0; b < 4; ++b) {
      double decay = 0.0;
      for (int site = 0; site < 2; ++site) {
        const bool bit = (b >> (1 - site)) & 1;
        decay += bit ? 3.0 * c2 : 8.24 * c2;
      }
      heff.at({b, b}) += Complex(0.0, -0.5 * decay);
    }
    DenseTensor ref({4});
    ref.at({0}) = 1.0;
    const DenseTensor want =
        contract(expm_dense(heff, Complex(0.0, -t_final)), ref, {{1, 0}});
    double err2 = 0.0;
    for (std::int64_t i = 0; i < 4; ++i) err2 += std::norm(got.data()[i] - want.data()[i]);
    return std::sqrt(err2);
  };

  const double ratio = terminal_error(2e-3) / terminal_error(1e-3);
  CHECK(ratio > 3.0);
  CHECK(ratio < 5.0);
}

TEST_CASE("max_step_jump_intensity flags coarse grids") {
  SimConfig cfg;
  cfg.n_sites = 2;
  cfg.dt = 0.05;  // gamma dt well above the one-jump-per-step comfort zone
  cfg.n_steps = 10;
  cfg.noise = {{ChannelKind::Dephasing, const_schedule(8.24)}};
  CHECK(make_context(cfg).max_step_jump_intensity() > 0.1);

  cfg.dt = 1e-3;
  CHECK(make_context(cfg).max_step_jump_intensity() < 0.1);
}

TEST_CASE("no_jump_step: oscillatory-rate survival matches exact quadrature") {
  // Single qubit, g = 0: the no-jump survival is exp(-Int r(s) ds)
  // exactly, so the composite of half/full/half dissipation spans with
  // midpoint rates must land on the Simpson value of the integral.
  auto shifted = [](double t) {
    const double g = gamma_at(nm_schedule(), t);
    return g < 0 ? -g : g;
  };
  const double T = 1.0;
  const int panels = 100000;
  double acc = shifted(0) + shifted(T);
  for (int p = 1; p < panels; ++p) acc += shifted(p * T / panels) * (p % 2 ? 4 : 2);
  const double exact = std::exp(-acc * (T / panels) / 3.0);

  SimConfig cfg;
  cfg.n_sites = 1;
  cfg.g_field = 0.0;
  cfg.dt = 1e-3;
  cfg.n_steps = 1000;
  cfg.noise = {{ChannelKind::Dephasing, nm_schedule()}};
  SimContext ctx = make_context(cfg);
  ctx.tweaks.disable_jumps = true;

  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  double log_n2 = 0.0;
  for (int j = 0; j <= ctx.n_steps; ++j) {
    log_n2 += std::log(ts.phi.norm_squared());
    no_jump_step(ts, j, ctx);
  }
  log_n2 += std::log(ts.phi.norm_squared());
  CHECK(std::exp(log_n2) == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("sample_jump: epsilon above delta_p means no jump") {
  const SimContext ctx =
      make_ctx(1, {{ChannelKind::Dephasing, const_schedule(8.24)}}, 1e-3, 10);
  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  const StepOperators so = step_operators(1, 10, 1e-3);
  CHECK_FALSE(sample_jump(ts, 0.999, 0.008, ctx, so).has_value());
}

TEST_CASE("sample_jump: a single channel is always selected") {
  const SimContext ctx =
      make_ctx(1, {{ChannelKind::Dephasing, const_schedule(8.24)}}, 1e-3, 10);
  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  ts.rng = RandomStream(9, 9);
  const StepOperators so = step_operators(1, 10, 1e-3);
  const auto jump = sample_jump(ts, 0.0, 0.008, ctx, so);
  REQUIRE(jump.has_value());
  CHECK(*jump == 0);
}

TEST_CASE("sample_jump: symmetric dephasing channels split evenly") {
  const SimContext ctx =
      make_ctx(2, {{ChannelKind::Dephasing, const_schedule(8.24)}}, 1e-3, 10);
  const StepOperators so = step_operators(1, 10, 1e-3);
  int site0 = 0;
  const int draws = 10000;
  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  ts.rng = RandomStream(123, 0);
  for (int i = 0; i < draws; ++i) {
    const auto jump = sample_jump(ts, 0.0, 1.0, ctx, so);
    REQUIRE(jump.has_value());
    if (ctx.channels[*jump].site == 0) ++site0;
  }
  // binomial 4 sigma around draws/2
  const double sigma = std::sqrt(draws * 0.25);
  CHECK(std::abs(site0 - draws / 2.0) < 4.0 * sigma);
}

TEST_CASE("apply_jump: raising flips the site and renormalizes") {
  const SimContext ctx = make_ctx(
      3, {{ChannelKind::Excitation, const_schedule(8.24)},
          {ChannelKind::Relaxation, const_schedule(8.24)}},
      1e-3, 10);
  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  // channel list is site-major: site 2's excitation sits at index 4
  const int channel = 4;
  REQUIRE(ctx.channels[channel].site == 2);
  REQUIRE(ctx.channels[channel].kind == ChannelKind::Excitation);
  apply_jump(ts, channel, 7, ctx);
  CHECK(ts.phi.norm_squared() == doctest::Approx(1.0));
  CHECK(ts.phi.expect_local(2, pauli_z()).real() == doctest::Approx(-1.0));
  CHECK(ts.phi.expect_local(0, pauli_z()).real() == doctest::Approx(1.0));
  REQUIRE(ts.jump_log.size() == 1);
  CHECK(ts.jump_log[0].step == 7);
  CHECK(ts.jump_log[0].channel == channel);
  // single-site operator: bond dimensions unchanged
  CHECK(ts.phi.max_bond_dim() == 1);
}

TEST_CASE("martingale_step: positive rates keep mu at exactly one") {
  const SimContext ctx =
      make_ctx(2, {{ChannelKind::Dephasing, const_schedule(8.24)}}, 1e-3, 10);
  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  const StepOperators so = step_operators(3, 10, 1e-3);
  martingale_step(ts, std::nullopt, ctx, so);
  CHECK(ts.mu == 1.0);
  martingale_step(ts, std::optional<int>(0), ctx, so);
  CHECK(ts.mu == 1.0);  // gamma/r = 1 exactly
}

TEST_CASE("martingale_step: a jump at gamma = -r flips the sign of mu") {
  // schedule with gamma(t_mid) = -3 so r = 3 and the ratio is exactly -1
  RateSchedule s;
  s.kind = RateSchedule::Kind::DampedOscillatory;
  s.gamma_inf = -3.0;  // constant negative via zero amplitude
  s.amplitude = 0.0;
  SimContext ctx = make_ctx(1, {{ChannelKind::Dephasing, const_schedule(1.0)}}, 1e-3, 10);
  ctx.kind_schedules[0] = s;

  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  ts.mu = 0.8;
  const StepOperators so = step_operators(3, 10, 1e-3);
  const auto rates = ctx.rates_at(so.t_mid);
  REQUIRE(rates.gamma[0] == doctest::Approx(-3.0));
  REQUIRE(rates.shift == doctest::Approx(6.0));
  martingale_step(ts, std::optional<int>(0), ctx, so);
  // continuous factor exp(C dt) then the ratio -1
  CHECK(ts.mu == doctest::Approx(-0.8 * std::exp(6.0 * 1e-3)).epsilon(1e-12));
}

TEST_CASE("martingale_step: no-jump interval accumulates exp(C dt)") {
  RateSchedule s;
  s.kind = RateSchedule::Kind::DampedOscillatory;
  s.gamma_inf = -2.0;
  s.amplitude = 0.0;
  SimContext ctx = make_ctx(1, {{ChannelKind::Dephasing, const_schedule(1.0)}}, 1e-3, 1000);
  ctx.kind_schedules[0] = s;

  TrajectoryState ts;
  ts.phi = ctx.initial_mps();
  for (int j = 1; j < 101; ++j) {
    martingale_step(ts, std::nullopt, ctx, step_operators(j, 1000, 1e-3));
  }
  // C = 4, over 100 bulk steps of dt: mu = exp(4 * 0.1)
  CHECK(ts.mu == doctest::Approx(std::exp(0.4)).epsilon(1e-12));

  // fine-step Euler integration of the drift equation as the oracle
  double euler = 1.0;
  const double h = 1e-6;
  for (int i = 0; i < 100000; ++i) euler *= (1.0 + 4.0 * h);
  CHECK(ts.mu == doctest::Approx(euler).epsilon(1e-3));
}

TEST_CASE("run_trajectory: closed system reproduces dense Schrodinger dynamics") {
  SimConfig cfg;
  cfg.n_sites = 2;
  cfg.dt = 1e-3;
  cfg.n_steps = 2000;  // T = 2
  cfg.chi_max = 4;
  cfg.sample_stride = 200;
  const SimContext ctx = make_context(cfg);
  const auto samples = run_trajectory(ctx, 5, 0);

  // dense reference
  const auto h0 = oracle::dense_tfi(2, 1.0, 0.5);
  const DenseTensor u = expm_dense(DenseTensor({4, 4}, h0), Complex(0.0, -1e-3));
  DenseTensor psi({4});
  psi.at({0}) = 1.0;
  std::size_t cursor = 1;
  for (int j = 1; j <= 2000; ++j) {
    psi = contract(u, psi, {{1, 0}});
    if (cursor < samples.times.size() &&
        std::abs(samples.times[cursor] - j * 1e-3) < 1e-12) {
      for (int site = 0; site < 2; ++site) {
        Complex want = 0.0;
        for (int b = 0; b < 4; ++b) {
          const int flipped = b ^ (1 << (1 - site));
          want += std::conj(psi.at({b})) * psi.at({flipped});
        }
        CHECK(std::abs(samples.x[cursor][site] - want.real()) < 1e-6);
      }
      ++cursor;
    }
  }
  CHECK(cursor == samples.times.size());

  // no noise: mu stays one, nothing jumps
  for (double m : samples.mu) CHECK(m == 1.0);
  CHECK(samples.jumps.empty());
}

TEST_CASE("run_trajectory: reference dephasing coherence decays with the shifted rate") {
  // single qubit, g = 0, |+> start: without reweighting the reference
  // ensemble mean of <X> decays as exp(-2 c^2 Int r ds)
  SimConfig cfg;
  cfg.n_sites = 1;
  cfg.g_field = 0.0;
  cfg.dt = 1e-3;
  cfg.n_steps = 300;
  cfg.sample_stride = 50;
  cfg.initial_state = InitialState::AllPlus;
  cfg.noise = {{ChannelKind::Dephasing, nm_schedule()}};
  const SimContext ctx = make_context(cfg);

  const int n_traj = 800;
  std::vector<double> mean(ctx.n_steps / cfg.sample_stride + 1, 0.0);
  std::vector<double> times;
  for (int i = 0; i < n_traj; ++i) {
    const auto s = run_trajectory(ctx, 77, i);
    if (times.empty()) times = s.times;
    for (std::size_t t = 0; t < s.times.size(); ++t) mean[t] += s.x[t][0];
  }
  for (auto& v : mean) v /= n_traj;

  // Simpson quadrature of the shifted rate
  auto shifted = [&](double t) {
    const double g = gamma_at(ctx.kind_schedules[0], t);
    return g < 0 ? -g : g;
  };
  for (std::size_t t = 1; t < times.size(); ++t) {
    const int panels = 2000;
    const double h = times[t] / panels;
    double acc = shifted(0.0) + shifted(times[t]);
    for (int p = 1; p < panels; ++p) acc += shifted(p * h) * (p % 2 ? 4.0 : 2.0);
    const double integral = acc * h / 3.0;
    const double want = std::exp(-2.0 * integral);
    // each trajectory's <X> is a Z-jump sign flip chain, so the ensemble
    // mean is exp(-2 Int r) with binomial scatter
    CHECK(std::abs(mean[t] - want) < 0.15);
  }
}

TEST_CASE("run_trajectory: bit-identical reruns with the same seed") {
  SimConfig cfg;
  cfg.n_sites = 3;
  cfg.dt = 1e-3;
  cfg.n_steps = 200;
  cfg.sample_stride = 20;
  cfg.noise = {{ChannelKind::Dephasing, nm_schedule()}};
  const SimContext ctx = make_context(cfg);

  const auto a = run_trajectory(ctx, 42, 7);
  const auto b = run_trajectory(ctx, 42, 7);
  REQUIRE(a.times.size() == b.times.size());
  CHECK(std::memcmp(a.mu.data(), b.mu.data(), a.mu.size() * sizeof(double)) == 0);
  for (std::size_t t = 0; t < a.x.size(); ++t) {
    CHECK(std::memcmp(a.x[t].data(), b.x[t].data(), a.x[t].size() * sizeof(double)) == 0);
  }
  REQUIRE(a.jumps.size() == b.jumps.size());
  for (std::size_t i = 0; i < a.jumps.size(); ++i) {
    CHECK(a.jumps[i].step == b.jumps[i].step);
    CHECK(a.jumps[i].channel == b.jumps[i].channel);
  }

  const auto c = run_trajectory(ctx, 42, 8);
  bool differs = c.jumps.size() != a.jumps.size();
  for (std::size_t i = 0; !differs && i < a.jumps.size(); ++i) {
    differs = a.jumps[i].step != c.jumps[i].step;
  }
  CHECK(differs);  // different index, different stream
}
