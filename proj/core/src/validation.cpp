#include "tjm/validation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "tjm/config.hpp"
#include "tjm/ensemble.hpp"
#include "tjm/linalg.hpp"
#include "tjm/oracle.hpp"
#include "tjm/tdvp.hpp"

namespace tjm {
namespace validation {

namespace {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

RateSchedule nonmarkovian_schedule() {
  RateSchedule s;
  s.kind = RateSchedule::Kind::DampedOscillatory;
  s.gamma_inf = 8.24;
  s.amplitude = 12.0;
  s.omega = 7.5;
  s.f_cubic_coeff = 0.25;
  return s;
}

RateSchedule constant_schedule(double gamma) {
  RateSchedule s;
  s.kind = RateSchedule::Kind::Constant;
  s.gamma_inf = gamma;
  return s;
}

SimConfig base_config() {
  SimConfig cfg;
  cfg.j_coupling = 1.0;
  cfg.g_field = 0.5;
  cfg.dt = 1e-3;
  cfg.chi_max = 4;
  cfg.svd_threshold = 1e-10;
  cfg.workers = 0;
  return cfg;
}

// Composite Simpson quadrature of gamma over [0, t].
double integrated_rate(const RateSchedule& sched, double t, int panels = 4000) {
  if (t <= 0) return 0.0;
  if (panels % 2) ++panels;
  const double h = t / panels;
  double acc = gamma_at(sched, 0.0) + gamma_at(sched, t);
  for (int i = 1; i < panels; ++i) {
    acc += gamma_at(sched, i * h) * (i % 2 ? 4.0 : 2.0);
  }
  return acc * h / 3.0;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= n;
  mb /= n;
  double sab = 0, saa = 0, sbb = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0 || sbb == 0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

CheckReport finish(CheckReport r, const Stopwatch& timer) {
  r.runtime_seconds = timer.seconds();
  return r;
}

}  // namespace

// Criterion 1: the dense master solver against the closed-form
// single-qubit dephasing solution |rho01(t)| = exp(-2 c^2 Int gamma)/2,
// with coherence revivals exactly on the negative-rate intervals.
CheckReport check_dephasing_coherence(Scale scale) {
  Stopwatch timer;
  CheckReport r;
  r.id = "analytic_dephasing_coherence";
  r.bound = 2e-3;

  SimConfig cfg = base_config();
  cfg.mode = RunMode::DenseMaster;
  cfg.n_sites = 1;
  cfg.g_field = 0.0;  // pure dephasing; the coherence solution needs H = 0
  cfg.n_steps = scale == Scale::Full ? 2000 : 1000;
  cfg.sample_stride = 10;
  cfg.initial_state = InitialState::AllPlus;
  cfg.noise = {{ChannelKind::Dephasing, nonmarkovian_schedule()}};
  const SimContext ctx = make_context(cfg);

  const auto series = oracle::integrate_master(ctx, /*substeps=*/10);

  double worst = 0.0;
  std::vector<double> coherence(series.times.size());
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    const double t = series.times[k];
    const double expected = 0.5 * std::exp(-2.0 * integrated_rate(cfg.noise[0].schedule, t));
    const Complex coh = oracle::master_coherence(series, static_cast<int>(k));
    coherence[k] = std::abs(coh);
    worst = std::max(worst, std::abs(coherence[k] - expected));
  }

  // Revival sign structure: |rho01| grows exactly while gamma < 0. Skip
  // intervals straddling a sign change and those where the coherence has
  // decayed below resolution.
  int sign_failures = 0;
  for (std::size_t k = 0; k + 1 < series.times.size(); ++k) {
    const double mid = 0.5 * (series.times[k] + series.times[k + 1]);
    const double g0 = gamma_at(cfg.noise[0].schedule, series.times[k]);
    const double g1 = gamma_at(cfg.noise[0].schedule, series.times[k + 1]);
    const double gm = gamma_at(cfg.noise[0].schedule, mid);
    if (std::abs(gm) < 0.5 || g0 * g1 <= 0.0) continue;
    if (coherence[k] < 1e-6) continue;
    const double slope = coherence[k + 1] - coherence[k];
    if ((gm < 0.0) != (slope > 0.0)) ++sign_failures;
  }

  r.observed = worst;
  r.pass = worst <= r.bound && sign_failures == 0;
  std::ostringstream d;
  d << "max |coherence - analytic| = " << worst << " (bound " << r.bound
    << "); revival sign mismatches = " << sign_failures;
  r.detail = d.str();
  return finish(r, timer);
}

// Criterion 2: reference-ensemble martingale mean stays at unity within
// 4 standard errors at every sampled time, and individual trajectories
// hold mu exactly constant while the shift C_t vanishes.
CheckReport check_martingale_mean(Scale scale, const StepperTweaks& tweaks) {
  Stopwatch timer;
  CheckReport r;
  r.id = "martingale_mean_unity";
  r.bound = 4.0;

  SimConfig cfg = base_config();
  cfg.mode = RunMode::DenseTrajectory;
  cfg.n_sites = 2;
  cfg.n_steps = scale == Scale::Full ? 2000 : 1500;
  cfg.sample_stride = 10;
  cfg.n_traj = scale == Scale::Full ? 2000 : 500;
  cfg.base_seed = 1002;
  cfg.noise = {{ChannelKind::Dephasing, nonmarkovian_schedule()}};
  SimContext ctx = make_context(cfg);
  ctx.tweaks = tweaks;

  EnsembleOptions opts;
  opts.n_traj = cfg.n_traj;
  opts.base_seed = cfg.base_seed;
  opts.backend = TrajectoryBackend::DenseStateVector;
  const EnsembleResult ens = run_ensemble(ctx, opts);

  double worst_ratio = 0.0;
  for (std::size_t t = 0; t < ens.times.size(); ++t) {
    const double dev = std::abs(ens.mu_mean[t] - 1.0);
    const double se = std::sqrt(ens.mu_var[t] / ens.n_traj);
    if (se == 0.0) {
      if (dev > 0.0) worst_ratio = std::max(worst_ratio, 1e9);
      continue;
    }
    worst_ratio = std::max(worst_ratio, dev / se);
  }

  // Constancy on shift-free steps, checked per trajectory at stride 1.
  SimContext fine = ctx;
  fine.sample_stride = 1;
  int constancy_failures = 0;
  const int probe_traj = scale == Scale::Full ? 50 : 20;
  for (int i = 0; i < probe_traj; ++i) {
    const auto traj = oracle::dense_trajectory(fine, cfg.base_seed, i);
    for (int j = 0; j + 2 < static_cast<int>(traj.mu.size()); ++j) {
      const StepOperators so = step_operators(j, fine.n_steps, fine.dt);
      const auto rates = fine.rates_at(so.t_mid);
      if (rates.shift == 0.0 && traj.mu[j + 1] != traj.mu[j]) ++constancy_failures;
    }
  }

  r.observed = worst_ratio;
  r.pass = worst_ratio <= r.bound && constancy_failures == 0;
  std::ostringstream d;
  d << "max |mean(mu)-1|/stderr = " << worst_ratio << " over " << ens.times.size()
    << " times, " << ens.n_traj << " trajectories; constancy violations = "
    << constancy_failures;
  r.detail = d.str();
  return finish(r, timer);
}

// Criteria 3 and 4: martingale-weighted tensor-network ensembles against
// the dense master solver on every site and sampled time. The nominal
// per-point allowance is max(0.05, 3 stderr); the deterministic gate
// pre-widens the statistical term to 4 stderr (the max z-score over the
// ~150 grid points is expected near 2.8 even for an exact method).
CheckReport check_oracle_equivalence(Scale scale, bool markovian) {
  Stopwatch timer;
  CheckReport r;
  r.id = markovian ? "oracle_equivalence_markovian" : "oracle_equivalence_nonmarkovian";
  r.bound = 1.0;  // normalized: deviation / max(0.05, 4 stderr)

  SimConfig cfg = base_config();
  cfg.mode = RunMode::Tjm;
  cfg.n_sites = 3;
  cfg.n_steps = 1000;
  cfg.sample_stride = 20;
  cfg.n_traj = scale == Scale::Full ? 1000 : 300;
  cfg.base_seed = markovian ? 1004 : 1003;
  cfg.noise = {{ChannelKind::Dephasing,
                markovian ? constant_schedule(8.24) : nonmarkovian_schedule()}};
  const SimContext ctx = make_context(cfg);

  EnsembleOptions opts;
  opts.n_traj = cfg.n_traj;
  opts.base_seed = cfg.base_seed;
  const EnsembleResult ens = run_ensemble(ctx, opts);
  const auto series = oracle::integrate_master(ctx, /*substeps=*/5);

  double worst = 0.0;
  double worst_dev = 0.0;
  double worst_z = 0.0;
  for (std::size_t t = 0; t < ens.times.size(); ++t) {
    for (std::size_t s = 0; s < ens.sites.size(); ++s) {
      const double exact =
          oracle::master_expect_x(series, static_cast<int>(t), ens.sites[s]);
      const double dev = std::abs(ens.x_mean[t][s] - exact);
      const double allowed = std::max(0.05, 4.0 * ens.x_stderr[t][s]);
      worst = std::max(worst, dev / allowed);
      worst_dev = std::max(worst_dev, dev);
      if (ens.x_stderr[t][s] > 0) worst_z = std::max(worst_z, dev / ens.x_stderr[t][s]);
    }
  }

  r.observed = worst;
  r.pass = worst <= r.bound;
  std::ostringstream d;
  d << "max deviation/allowance = " << worst << " (worst absolute deviation " << worst_dev
    << ", max z = " << worst_z << ", " << ens.n_traj << " trajectories)";
  r.detail = d.str();
  return finish(r, timer);
}

// Criterion 5: deterministic no-jump propagation converges at second
// order to dense exp(-i H_eff T); halving dt cuts the error by ~4.
CheckReport check_trotter_order(Scale scale, int trotter_order) {
  Stopwatch timer;
  CheckReport r;
  r.id = "trotter_second_order";

  SimConfig cfg = base_config();
  cfg.n_sites = 2;
  cfg.noise = {{ChannelKind::Excitation, constant_schedule(8.24)},
               {ChannelKind::Relaxation, constant_schedule(3.0)}};
  const double t_final = scale == Scale::Full ? 0.2 : 0.1;

  // Dense reference: exp(-i H_eff T) psi0 with
  // H_eff = H0 - (i/2) sum gamma c^2 L^dag L.
  const std::int64_t dim = 4;
  const auto h0 = oracle::dense_tfi(cfg.n_sites, cfg.j_coupling, cfg.g_field);
  DenseTensor heff({dim, dim}, h0);
  {
    SimContext probe = make_context(cfg);
    const double c2 = probe.channel_norm * probe.channel_norm;
    for (std::int64_t b = 0; b < dim; ++b) {
      double decay = 0.0;
      for (int site = 0; site < cfg.n_sites; ++site) {
        const bool bit = (b >> (cfg.n_sites - 1 - site)) & 1;
        decay += bit ? 3.0 * c2 : 8.24 * c2;  // rel sees |1>, exc sees |0>
      }
      heff.at({b, b}) += Complex(0.0, -0.5 * decay);
    }
  }

  auto propagate = [&](double dt) {
    SimConfig run_cfg = cfg;
    run_cfg.dt = dt;
    run_cfg.n_steps = static_cast<int>(std::llround(t_final / dt));
    SimContext ctx = make_context(run_cfg);
    ctx.tweaks.disable_jumps = true;
    ctx.tweaks.trotter_order = trotter_order;

    TrajectoryState ts;
    ts.phi = ctx.initial_mps();
    ts.rng = RandomStream(0, 0);
    double log_amp = 0.0;
    for (int j = 0; j <= ctx.n_steps; ++j) {
      log_amp += 0.5 * std::log(ts.phi.norm_squared());
      no_jump_step(ts, j, ctx);
    }
    DenseTensor v = ts.phi.to_dense();
    v.scale(std::exp(log_amp));
    return v;
  };

  auto error_at = [&](double dt) {
    const DenseTensor evolved = propagate(dt);
    DenseTensor ref({dim});
    ref.at({0}) = 1.0;
    const DenseTensor dense =
        contract(expm_dense(heff, Complex(0.0, -t_final)), ref, {{1, 0}});
    double err2 = 0.0;
    for (std::int64_t i = 0; i < dim; ++i) {
      err2 += std::norm(evolved.data()[i] - dense.data()[i]);
    }
    return std::sqrt(err2);
  };

  const double coarse = error_at(2e-3);
  const double fine = error_at(1e-3);
  const double ratio = fine > 0 ? coarse / fine : 0.0;

  r.observed = ratio;
  r.bound = trotter_order == 2 ? 5.0 : 2.4;  // upper edge; lower edge in detail
  const double lower = trotter_order == 2 ? 3.0 : 1.6;
  r.pass = ratio >= lower && ratio <= r.bound;
  std::ostringstream d;
  d << "error(2dt)/error(dt) = " << ratio << " expected in [" << lower << ", " << r.bound
    << "] (errors " << coarse << " / " << fine << ")";
  r.detail = d.str();
  return finish(r, timer);
}

// Criterion 6: at full bond dimension the TDVP step reproduces the dense
// unitary to near machine precision, with norm and energy conserved.
CheckReport check_tdvp_exactness(Scale scale) {
  Stopwatch timer;
  CheckReport r;
  r.id = "tdvp_full_rank_exactness";
  r.bound = 1e-8;

  const int n = scale == Scale::Full ? 4 : 3;
  const std::int64_t dim = std::int64_t{1} << n;
  const double dt = 0.01;
  const int steps = 100;

  RandomStream rng(77, 0);
  std::vector<Complex> amps(dim);
  double n2 = 0.0;
  for (auto& a : amps) {
    a = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
    n2 += std::norm(a);
  }
  for (auto& a : amps) a /= std::sqrt(n2);

  MpsState psi = MpsState::from_dense(DenseTensor({dim}, amps));
  psi.move_center(0);
  const MpOperator h = MpOperator::tfi(n, 1.0, 0.5);
  const std::int64_t chi_full = psi.max_bond_dim();

  const auto hdense = oracle::dense_tfi(n, 1.0, 0.5);
  const DenseTensor u = expm_dense(DenseTensor({dim, dim}, hdense), Complex(0.0, -dt));
  DenseTensor ref({dim}, amps);

  const double e0 = expect_mpo(psi, h).real();
  double worst_state = 0.0, worst_norm = 0.0, worst_energy = 0.0;
  for (int j = 0; j < steps; ++j) {
    dynamic_step(psi, h, dt, chi_full, 0.0);
    ref = contract(u, ref, {{1, 0}});
    const DenseTensor got = psi.to_dense();
    double err2 = 0.0;
    for (std::int64_t i = 0; i < dim; ++i) err2 += std::norm(got.data()[i] - ref.data()[i]);
    worst_state = std::max(worst_state, std::sqrt(err2));
    worst_norm = std::max(worst_norm, std::abs(psi.norm_squared() - 1.0));
    worst_energy = std::max(worst_energy, std::abs(expect_mpo(psi, h).real() - e0));
  }

  const double horizon = steps * dt;  // drifts are per unit time
  const double observed =
      std::max({worst_state, worst_norm / horizon, worst_energy / horizon});
  r.observed = observed;
  r.pass = observed <= r.bound;
  std::ostringstream d;
  d << "max per-step state error " << worst_state << ", norm drift " << worst_norm
    << ", energy drift " << worst_energy << " over T = " << horizon;
  r.detail = d.str();
  return finish(r, timer);
}

// Criterion 7: exact channel completeness after normalization and master
// trace preservation through negative-rate intervals.
CheckReport check_completeness_and_trace(Scale scale) {
  Stopwatch timer;
  CheckReport r;
  r.id = "completeness_and_trace";
  r.bound = 1e-8;

  const int n = scale == Scale::Full ? 5 : 3;
  std::vector<NoiseChannel> templates;
  for (ChannelKind kind :
       {ChannelKind::Dephasing, ChannelKind::Excitation, ChannelKind::Relaxation}) {
    templates.push_back(NoiseChannel{kind, -1, channel_op(kind), 1.0, constant_schedule(1.0)});
  }
  const auto channels = normalize_channels(templates, n);

  // Dense sum over all channels and sites of c^2 L^dag L.
  const std::int64_t dim = std::int64_t{1} << n;
  std::vector<double> diag(dim, 0.0);
  double offdiag = 0.0;
  for (const auto& ch : channels) {
    const DenseTensor ldl = contract(ch.op.conjugated(), ch.op, {{0, 0}});
    offdiag += std::abs(ldl.at({0, 1})) + std::abs(ldl.at({1, 0}));
    for (std::int64_t b = 0; b < dim; ++b) {
      const int bit = (b >> (n - 1 - ch.site)) & 1;
      diag[b] += ch.norm_factor * ch.norm_factor * ldl.at({bit, bit}).real();
    }
  }
  double completeness = offdiag;
  for (double v : diag) completeness = std::max(completeness, std::abs(v - 1.0));

  SimConfig cfg = base_config();
  cfg.mode = RunMode::DenseMaster;
  cfg.n_sites = 2;
  cfg.n_steps = scale == Scale::Full ? 2000 : 1000;
  cfg.sample_stride = 100;
  cfg.noise = {{ChannelKind::Dephasing, nonmarkovian_schedule()}};
  const auto series = oracle::integrate_master(make_context(cfg), /*substeps=*/5);

  r.observed = std::max(completeness, series.max_trace_drift);
  r.pass = completeness <= 1e-12 && series.max_trace_drift <= 1e-8;
  std::ostringstream d;
  d << "completeness defect " << completeness << " (bound 1e-12), trace drift "
    << series.max_trace_drift << " (bound 1e-8)";
  r.detail = d.str();
  return finish(r, timer);
}

// Criterion 8: binned jump counts follow the shifted-rate intensity
// within 4 sigma and oscillate in phase with r(t). Dephasing keeps the
// per-step jump probability state independent, so the expected counts
// are exact.
CheckReport check_jump_statistics(Scale scale) {
  Stopwatch timer;
  CheckReport r;
  r.id = "jump_statistics";
  r.bound = 4.0;

  SimConfig cfg = base_config();
  cfg.mode = RunMode::Tjm;
  cfg.n_sites = 2;
  cfg.n_steps = 1500;
  cfg.sample_stride = 50;  // jump bins are stride wide
  cfg.n_traj = scale == Scale::Full ? 1000 : 400;
  cfg.base_seed = 1008;
  cfg.noise = {{ChannelKind::Dephasing, nonmarkovian_schedule()}};
  const SimContext ctx = make_context(cfg);

  EnsembleOptions opts;
  opts.n_traj = cfg.n_traj;
  opts.base_seed = cfg.base_seed;
  const EnsembleResult ens = run_ensemble(ctx, opts);

  const auto& counts = ens.jump_counts.at(ChannelKind::Dephasing);
  const int bin_steps = ens.bin_width_steps;
  std::vector<double> expected(counts.size(), 0.0), variance(counts.size(), 0.0);
  const double c2n = ctx.channel_norm * ctx.channel_norm * ctx.n_sites;
  for (int j = 0; j <= ctx.n_steps; ++j) {
    const StepOperators so = step_operators(j, ctx.n_steps, ctx.dt);
    const auto rates = ctx.rates_at(so.t_mid);
    const double p = 1.0 - std::exp(-rates.rate[0] * c2n * so.dissipation_span);
    const std::size_t bin = std::min<std::size_t>(j / bin_steps, counts.size() - 1);
    expected[bin] += ens.n_traj * p;
    variance[bin] += ens.n_traj * p * (1.0 - p);
  }

  double worst_sigma = 0.0;
  std::vector<double> observed_counts(counts.begin(), counts.end());
  for (std::size_t b = 0; b < counts.size(); ++b) {
    const double sigma = std::sqrt(std::max(variance[b], 1e-12));
    worst_sigma = std::max(worst_sigma, std::abs(counts[b] - expected[b]) / sigma);
  }
  const double corr = pearson(observed_counts, expected);
  const double corr_floor = scale == Scale::Full ? 0.9 : 0.85;

  r.observed = worst_sigma;
  r.pass = worst_sigma <= r.bound && corr >= corr_floor;
  std::ostringstream d;
  d << "max |count-expected|/sigma = " << worst_sigma << " over " << counts.size()
    << " bins; phase correlation = " << corr << " (floor " << corr_floor << ")";
  r.detail = d.str();
  return finish(r, timer);
}

namespace {

// Noise-corrected statistics over an ensemble kept with raw trajectory
// samples. Monte-Carlo noise inflates every squared quantity by the
// estimator variance; subtracting it makes curve geometry comparable to
// the exact solution even at modest trajectory counts.
struct ProfileStats {
  std::vector<double> times;
  std::vector<std::vector<double>> mean;  // [time][site]
  int n_traj = 0;
  const EnsembleResult* ens = nullptr;

  // Detrended RMS oscillation of the site-mean curve over a window,
  // noise-corrected.
  double osc2(double from, double to) const {
    std::vector<double> m;   // site-mean path
    std::vector<double> v;   // its per-time sampling variance
    for (std::size_t t = 0; t < times.size(); ++t) {
      if (times[t] < from || times[t] > to) continue;
      double acc = 0.0, acc2 = 0.0;
      for (int i = 0; i < n_traj; ++i) {
        double y = 0.0;
        for (std::size_t s = 0; s < ens->raw[i].x[t].size(); ++s) {
          y += ens->raw[i].mu[t] * ens->raw[i].x[t][s];
        }
        y /= static_cast<double>(ens->raw[i].x[t].size());
        acc += y;
        acc2 += y * y;
      }
      const double mu = acc / n_traj;
      const double var = std::max(0.0, acc2 / n_traj - mu * mu);
      m.push_back(mu);
      v.push_back(var / n_traj);
    }
    double mbar = 0.0, noise = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      mbar += m[i];
      noise += v[i];
    }
    mbar /= m.size();
    noise /= m.size();
    double raw = 0.0;
    for (double x : m) raw += (x - mbar) * (x - mbar);
    raw /= m.size();
    return std::max(0.0, raw - noise);
  }

  // Squared L2-over-time distance between two site curves with the
  // sampling variance of the per-trajectory difference subtracted.
  double pair_dist2(int site_a, int site_b) const {
    double acc_total = 0.0;
    for (std::size_t t = 0; t < times.size(); ++t) {
      double acc = 0.0, acc2 = 0.0;
      for (int i = 0; i < n_traj; ++i) {
        const double d = ens->raw[i].mu[t] * (ens->raw[i].x[t][site_a] - ens->raw[i].x[t][site_b]);
        acc += d;
        acc2 += d * d;
      }
      const double mu = acc / n_traj;
      const double var = std::max(0.0, acc2 / n_traj - mu * mu);
      acc_total += mu * mu - var / n_traj;
    }
    return acc_total / static_cast<double>(times.size());
  }

  // Window mean of the site-averaged signal plus its standard error
  // (from per-trajectory window means, so time correlations are handled
  // exactly).
  std::pair<double, double> late_mean(double from, double to) const {
    std::vector<double> z(n_traj, 0.0);
    int cnt = 0;
    for (std::size_t t = 0; t < times.size(); ++t) {
      if (times[t] < from || times[t] > to) continue;
      ++cnt;
      for (int i = 0; i < n_traj; ++i) {
        double y = 0.0;
        for (std::size_t s = 0; s < ens->raw[i].x[t].size(); ++s) {
          y += ens->raw[i].mu[t] * ens->raw[i].x[t][s];
        }
        z[i] += y / static_cast<double>(ens->raw[i].x[t].size());
      }
    }
    double mean = 0.0;
    for (int i = 0; i < n_traj; ++i) {
      z[i] /= std::max(cnt, 1);
      mean += z[i];
    }
    mean /= n_traj;
    double var = 0.0;
    for (int i = 0; i < n_traj; ++i) var += (z[i] - mean) * (z[i] - mean);
    var /= std::max(n_traj - 1, 1);
    return {mean, std::sqrt(var / n_traj)};
  }
};

}  // namespace

// Criterion 9: qualitative site-resolved structure of the 5-site runs:
// the oscillatory component of <X> damps, boundary sites separate from
// the bulk beyond the bulk's internal spread, and the
// excitation/relaxation mixes produce transient offsets distinct from
// the dephasing profile (each mix agreeing with its own dense oracle).
CheckReport check_site_profiles(Scale scale) {
  Stopwatch timer;
  CheckReport r;
  r.id = "site_profiles_qualitative";
  r.bound = 0.0;

  const bool full = scale == Scale::Full;
  SimConfig cfg = base_config();
  cfg.mode = RunMode::Tjm;
  cfg.n_sites = full ? 5 : 3;
  cfg.n_steps = full ? 1600 : 1200;
  cfg.sample_stride = 20;
  const double t_final = cfg.n_steps * cfg.dt;
  const int n = cfg.n_sites;

  struct Run {
    EnsembleResult ens;
    SimContext ctx;
    ProfileStats stats;
  };
  auto execute = [&](std::vector<NoiseSpec> noise, int n_traj, std::uint64_t seed) {
    SimConfig c = cfg;
    c.noise = std::move(noise);
    c.n_traj = n_traj;
    c.base_seed = seed;
    auto run = std::make_unique<Run>();
    run->ctx = make_context(c);
    EnsembleOptions opts;
    opts.n_traj = c.n_traj;
    opts.base_seed = c.base_seed;
    opts.keep_raw = true;
    run->ens = run_ensemble(run->ctx, opts);
    run->stats = ProfileStats{run->ens.times, run->ens.x_mean, run->ens.n_traj, &run->ens};
    return run;
  };

  // quick scale drops the Markovian dephasing run (reduced matrix).
  std::unique_ptr<Run> markov;
  if (full) markov = execute({{ChannelKind::Dephasing, constant_schedule(8.24)}}, 1200, 1009);
  const auto nonmarkov =
      execute({{ChannelKind::Dephasing, nonmarkovian_schedule()}}, full ? 900 : 400, 1010);
  const auto mix_nm = execute({{ChannelKind::Excitation, nonmarkovian_schedule()},
                               {ChannelKind::Relaxation, nonmarkovian_schedule()}},
                              full ? 400 : 200, 1011);
  const auto mix_m = execute({{ChannelKind::Excitation, constant_schedule(8.24)},
                              {ChannelKind::Relaxation, nonmarkovian_schedule()}},
                             full ? 400 : 200, 1012);

  std::ostringstream d;

  // (a) the oscillation amplitude of the site-mean curve decays.
  bool damped = true;
  std::vector<const Run*> dephasing_runs;
  if (full) dephasing_runs.push_back(markov.get());
  dephasing_runs.push_back(nonmarkov.get());
  for (const Run* run : dephasing_runs) {
    const double early = run->stats.osc2(0.0, 0.4);
    const double late = run->stats.osc2(t_final - 0.4, t_final);
    if (!(early > 4e-4 && late < 0.5625 * early)) damped = false;  // RMS ratio 0.75
    d << "osc2 " << early << "->" << late << "; ";
  }

  // (b) boundary-vs-bulk curve separation on noise-corrected squared
  // distances: every boundary-bulk pair must sit well above the typical
  // bulk-bulk distance (the exact gap is two orders of magnitude).
  bool boundary_separated = true;
  for (const Run* run : dephasing_runs) {
    double min_boundary = 1e300, mean_bulk = 0.0;
    int bulk_pairs = 0;
    for (int b : {0, n - 1}) {
      for (int s = 1; s + 1 < n; ++s) {
        min_boundary = std::min(min_boundary, run->stats.pair_dist2(b, s));
      }
    }
    for (int s1 = 1; s1 + 1 < n; ++s1) {
      for (int s2 = s1 + 1; s2 + 1 < n; ++s2) {
        mean_bulk += run->stats.pair_dist2(s1, s2);
        ++bulk_pairs;
      }
    }
    if (bulk_pairs > 0) mean_bulk /= bulk_pairs;
    d << "D2 boundary/bulk " << min_boundary << "/" << mean_bulk << "; ";
    if (!(min_boundary > std::max(2.0 * mean_bulk, 2e-4))) boundary_separated = false;
  }

  // (c) transient offsets: exact late-window levels of the mixes sit
  // away from the dephasing level and from each other, and the sampled
  // ensembles track their own oracles.
  auto exact_late = [&](const SimContext& ctx) {
    const auto series = oracle::integrate_master(ctx, /*substeps=*/1);
    double acc = 0.0;
    int cnt = 0;
    for (std::size_t t = 0; t < series.times.size(); ++t) {
      if (series.times[t] < t_final - 0.4) continue;
      for (int s = 0; s < ctx.n_sites; ++s) {
        acc += oracle::master_expect_x(series, static_cast<int>(t), s);
        ++cnt;
      }
    }
    return acc / std::max(cnt, 1);
  };
  const double exact_b = exact_late(nonmarkov->ctx);
  const double exact_c = exact_late(mix_nm->ctx);
  const double exact_d = exact_late(mix_m->ctx);
  const auto [got_c, sem_c] = mix_nm->stats.late_mean(t_final - 0.4, t_final);
  const auto [got_d, sem_d] = mix_m->stats.late_mean(t_final - 0.4, t_final);

  bool offsets = std::abs(exact_c - exact_b) > 0.02 && std::abs(exact_d - exact_b) > 0.02 &&
                 std::abs(exact_c - exact_d) > 0.005;
  if (std::abs(got_c - exact_c) > 4.0 * sem_c + 0.005) offsets = false;
  if (std::abs(got_d - exact_d) > 4.0 * sem_d + 0.005) offsets = false;
  d << "late exact b/c/d = " << exact_b << "/" << exact_c << "/" << exact_d
    << ", tjm c/d = " << got_c << "(" << sem_c << ")/" << got_d << "(" << sem_d << ")";

  r.observed = (damped ? 0.0 : 1.0) + (boundary_separated ? 0.0 : 1.0) + (offsets ? 0.0 : 1.0);
  r.pass = damped && boundary_separated && offsets;
  r.detail = d.str();
  return finish(r, timer);
}

// Criterion 10: the large-chain configuration finishes within budget at
// bounded memory and reruns bit-identically.
CheckReport check_scalability(Scale scale) {
  Stopwatch timer;
  CheckReport r;
  r.id = "scalability_n100";
  r.bound = 1800.0;  // seconds

  SimConfig cfg = base_config();
  cfg.mode = RunMode::Tjm;
  cfg.n_sites = scale == Scale::Full ? 100 : 40;
  cfg.dt = 0.01;
  cfg.n_steps = scale == Scale::Full ? 100 : 50;
  cfg.sample_stride = 10;
  cfg.n_traj = scale == Scale::Full ? 10 : 3;
  cfg.base_seed = 1013;
  cfg.sample_sites = {0, cfg.n_sites / 2};
  cfg.noise = {{ChannelKind::Dephasing, nonmarkovian_schedule()}};
  const SimContext ctx = make_context(cfg);

  EnsembleOptions opts;
  opts.n_traj = cfg.n_traj;
  opts.base_seed = cfg.base_seed;
  const EnsembleResult first = run_ensemble(ctx, opts);
  const EnsembleResult second = run_ensemble(ctx, opts);

  bool identical = first.times == second.times && first.mu_mean == second.mu_mean &&
                   first.x_mean == second.x_mean && first.x_stderr == second.x_stderr;

  // Memory bound: one trajectory's tensors stay within N * d * chi^2
  // elements (chain ends are smaller).
  MpsState state = ctx.initial_mps();
  for (int j = 0; j < 5; ++j) dynamic_step(state, ctx.hamiltonian, ctx.dt, ctx.chi_max, ctx.svd_threshold);
  std::int64_t elems = 0;
  for (int k = 0; k < state.n_sites(); ++k) elems += state.site(k).size();
  const std::int64_t cap = static_cast<std::int64_t>(ctx.n_sites) * 2 * ctx.chi_max * ctx.chi_max;
  const bool memory_ok = state.max_bond_dim() <= ctx.chi_max && elems <= cap;

  const double elapsed = timer.seconds();
  r.observed = elapsed;
  r.pass = elapsed <= r.bound && identical && memory_ok && first.failures.empty();
  std::ostringstream d;
  d << "wall " << elapsed << " s (bound " << r.bound << "); bit-identical rerun = "
    << (identical ? "yes" : "no") << "; tensor elements " << elems << " <= cap " << cap
    << "; max bond " << state.max_bond_dim();
  r.detail = d.str();
  return finish(r, timer);
}

std::vector<CheckReport> run_all(Scale scale, std::ostream* log) {
  std::vector<CheckReport> reports;
  auto emit = [&](CheckReport rep) {
    if (log) {
      (*log) << (rep.pass ? "[PASS] " : "[FAIL] ") << rep.id << " observed=" << rep.observed
             << " bound=" << rep.bound << " (" << rep.runtime_seconds << " s)\n"
             << "       " << rep.detail << "\n";
      log->flush();
    }
    reports.push_back(std::move(rep));
  };

  emit(check_dephasing_coherence(scale));
  emit(check_martingale_mean(scale));
  emit(check_oracle_equivalence(scale, /*markovian=*/false));
  emit(check_oracle_equivalence(scale, /*markovian=*/true));
  emit(check_trotter_order(scale));
  emit(check_tdvp_exactness(scale));
  emit(check_completeness_and_trace(scale));
  emit(check_jump_statistics(scale));
  emit(check_site_profiles(scale));
  emit(check_scalability(scale));
  return reports;
}

void write_report_json(const std::vector<CheckReport>& reports, const std::string& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& rep : reports) {
    arr.push_back({{"id", rep.id},
                   {"observed", rep.observed},
                   {"bound", rep.bound},
                   {"pass", rep.pass},
                   {"runtime_seconds", rep.runtime_seconds},
                   {"detail", rep.detail}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_report_json: cannot open " + path);
  out << arr.dump(2) << '\n';
}

void print_summary(const std::vector<CheckReport>& reports, std::ostream& out) {
  int passed = 0;
  for (const auto& rep : reports) {
    out << (rep.pass ? "[PASS] " : "[FAIL] ") << rep.id << "\n";
    if (rep.pass) ++passed;
  }
  out << passed << "/" << reports.size() << " acceptance checks passed\n";
}

}  // namespace validation
}  // namespace tjm
