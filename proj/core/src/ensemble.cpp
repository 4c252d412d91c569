#include "tjm/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "tjm/oracle.hpp"

namespace tjm {

std::pair<double, double> weighted_observable(
    std::span<const std::pair<double, double>> mu_value) {
  if (mu_value.empty()) throw std::invalid_argument("weighted_observable: empty sample");
  const std::size_t m = mu_value.size();
  double mean = 0.0;
  for (const auto& [mu, v] : mu_value) mean += mu * v;
  mean /= static_cast<double>(m);
  if (m == 1) return {mean, 0.0};
  double ss = 0.0;
  for (const auto& [mu, v] : mu_value) {
    const double d = mu * v - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / static_cast<double>(m - 1));
  return {mean, sd / std::sqrt(static_cast<double>(m))};
}

std::map<ChannelKind, std::vector<long>> jump_histogram(
    const std::vector<std::vector<JumpEvent>>& logs, const SimContext& ctx,
    int bin_steps) {
  if (bin_steps < 1) throw std::invalid_argument("jump_histogram: bin width must be >= 1");
  const int n_bins = (ctx.n_steps + bin_steps) / bin_steps;  // steps run 0..n
  std::map<ChannelKind, std::vector<long>> counts;
  for (ChannelKind kind : ctx.kinds) counts[kind].assign(n_bins, 0);
  const std::size_t n_kinds = ctx.kinds.size();
  for (const auto& log : logs) {
    for (const auto& ev : log) {
      const ChannelKind kind = ctx.kinds[ev.channel % n_kinds];
      const int bin = std::min(ev.step / bin_steps, n_bins - 1);
      ++counts[kind][bin];
    }
  }
  return counts;
}

EnsembleResult run_ensemble(const SimContext& ctx, const EnsembleOptions& opts) {
  if (opts.n_traj < 1) throw std::invalid_argument("run_ensemble: need at least one trajectory");

  std::vector<std::optional<TrajectorySamples>> results(opts.n_traj);
  std::vector<std::optional<EnsembleResult::Failure>> failures(opts.n_traj);

  auto run_one = [&](std::uint32_t index) {
    try {
      if (opts.backend == TrajectoryBackend::TensorNetwork) {
        results[index] = run_trajectory(ctx, opts.base_seed, index);
      } else {
        results[index] = oracle::dense_trajectory(ctx, opts.base_seed, index);
      }
    } catch (const std::exception& e) {
      failures[index] = EnsembleResult::Failure{index, opts.base_seed, e.what()};
    }
  };

  int workers = opts.workers;
  if (workers <= 0) {
    workers = static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
  }
  workers = std::min<int>(workers, opts.n_traj);

  if (workers == 1) {
    for (int i = 0; i < opts.n_traj; ++i) run_one(i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= opts.n_traj) break;
          run_one(static_cast<std::uint32_t>(i));
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  // Sequential merge in index order; scheduling cannot affect the output.
  EnsembleResult out;
  out.bin_width_steps = ctx.sample_stride;
  out.bin_width_time = ctx.sample_stride * ctx.dt;

  std::vector<const TrajectorySamples*> ok;
  for (int i = 0; i < opts.n_traj; ++i) {
    if (results[i]) {
      ok.push_back(&*results[i]);
      out.coarse_dp_warnings += results[i]->coarse_dp_warnings;
    } else if (failures[i]) {
      out.failures.push_back(*failures[i]);
    }
  }
  if (ok.empty()) throw std::runtime_error("run_ensemble: every trajectory faulted");

  out.n_traj = static_cast<int>(ok.size());
  out.times = ok.front()->times;
  out.sites = ctx.resolved_sample_sites();
  const std::size_t n_times = out.times.size();
  const std::size_t n_sites = out.sites.size();

  for (const auto* r : ok) {
    if (r->times.size() != n_times) {
      throw std::runtime_error("run_ensemble: inconsistent sampling grids");
    }
  }

  out.x_mean.assign(n_times, std::vector<double>(n_sites, 0.0));
  out.x_stderr.assign(n_times, std::vector<double>(n_sites, 0.0));
  if (ctx.measure_z) {
    out.z_mean.assign(n_times, std::vector<double>(n_sites, 0.0));
    out.z_stderr.assign(n_times, std::vector<double>(n_sites, 0.0));
  }
  out.mu_mean.assign(n_times, 0.0);
  out.mu_var.assign(n_times, 0.0);

  std::vector<std::pair<double, double>> samples(ok.size());
  for (std::size_t t = 0; t < n_times; ++t) {
    for (std::size_t s = 0; s < n_sites; ++s) {
      for (std::size_t i = 0; i < ok.size(); ++i) {
        samples[i] = {ok[i]->mu[t], ok[i]->x[t][s]};
      }
      const auto [mean, se] = weighted_observable(samples);
      out.x_mean[t][s] = mean;
      out.x_stderr[t][s] = se;
      if (ctx.measure_z) {
        for (std::size_t i = 0; i < ok.size(); ++i) {
          samples[i] = {ok[i]->mu[t], ok[i]->z[t][s]};
        }
        const auto [zmean, zse] = weighted_observable(samples);
        out.z_mean[t][s] = zmean;
        out.z_stderr[t][s] = zse;
      }
    }
    double mean = 0.0;
    for (const auto* r : ok) mean += r->mu[t];
    mean /= static_cast<double>(ok.size());
    double var = 0.0;
    for (const auto* r : ok) {
      const double d = r->mu[t] - mean;
      var += d * d;
    }
    out.mu_mean[t] = mean;
    out.mu_var[t] = ok.size() > 1 ? var / static_cast<double>(ok.size() - 1) : 0.0;
  }

  std::vector<std::vector<JumpEvent>> logs;
  logs.reserve(ok.size());
  for (const auto* r : ok) logs.push_back(r->jumps);
  out.jump_counts = jump_histogram(logs, ctx, out.bin_width_steps);

  if (opts.keep_raw) {
    out.raw.reserve(ok.size());
    for (auto& r : results) {
      if (r) out.raw.push_back(std::move(*r));
    }
  }
  return out;
}

}  // namespace tjm
