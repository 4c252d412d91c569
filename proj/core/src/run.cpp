#include "tjm/run.hpp"

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "tjm/oracle.hpp"
#include "tjm/version.hpp"

namespace tjm {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific, 9);
  return std::string(buf, res.ptr);
}

std::ofstream open_out(const fs::path& path, std::vector<std::string>& written) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  written.push_back(path.string());
  return out;
}

void write_observables(const fs::path& path, const SimConfig& cfg,
                       const std::vector<double>& times, const std::vector<int>& sites,
                       const std::vector<std::vector<double>>& x_mean,
                       const std::vector<std::vector<double>>& x_stderr,
                       const std::vector<std::vector<double>>& z_mean,
                       const std::vector<std::vector<double>>& z_stderr,
                       int n_traj, std::vector<std::string>& written) {
  auto out = open_out(path, written);
  out << "time,site,observable,mean,stderr,n_traj\n";
  for (std::size_t t = 0; t < times.size(); ++t) {
    for (std::size_t s = 0; s < sites.size(); ++s) {
      out << fmt(times[t]) << ',' << sites[s] << ",x," << fmt(x_mean[t][s]) << ','
          << fmt(x_stderr[t][s]) << ',' << n_traj << '\n';
      if (cfg.measure_z) {
        out << fmt(times[t]) << ',' << sites[s] << ",z," << fmt(z_mean[t][s]) << ','
            << fmt(z_stderr[t][s]) << ',' << n_traj << '\n';
      }
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_martingale(const fs::path& path, const std::vector<double>& times,
                      const std::vector<double>& mu_mean, const std::vector<double>& mu_var,
                      std::vector<std::string>& written) {
  auto out = open_out(path, written);
  out << "time,mean_mu,var_mu\n";
  for (std::size_t t = 0; t < times.size(); ++t) {
    out << fmt(times[t]) << ',' << fmt(mu_mean[t]) << ',' << fmt(mu_var[t]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

void write_jumps(const fs::path& path, const EnsembleResult* ens,
                 std::vector<std::string>& written) {
  auto out = open_out(path, written);
  out << "time_bin,channel_kind,count\n";
  if (ens) {
    for (const auto& [kind, counts] : ens->jump_counts) {
      for (std::size_t b = 0; b < counts.size(); ++b) {
        out << fmt(b * ens->bin_width_time) << ',' << to_string(kind) << ',' << counts[b]
            << '\n';
      }
    }
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

RunArtifacts run(const SimConfig& cfg, const std::string& out_dir) {
  const auto t0 = std::chrono::steady_clock::now();

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

  const SimContext ctx = make_context(cfg);
  RunArtifacts artifacts;
  artifacts.coarse_grid_warning = ctx.max_step_jump_intensity() > 0.1;

  const fs::path dir(out_dir);

  if (cfg.mode == RunMode::DenseMaster) {
    const auto series = oracle::integrate_master(ctx);
    const auto sites = ctx.resolved_sample_sites();
    const std::size_t nt = series.times.size();
    std::vector<std::vector<double>> x_mean(nt), x_err(nt), z_mean(nt), z_err(nt);
    for (std::size_t t = 0; t < nt; ++t) {
      for (int site : sites) {
        x_mean[t].push_back(oracle::master_expect_x(series, static_cast<int>(t), site));
        x_err[t].push_back(0.0);
        if (cfg.measure_z) {
          z_mean[t].push_back(oracle::master_expect_z(series, static_cast<int>(t), site));
          z_err[t].push_back(0.0);
        }
      }
    }
    write_observables(dir / "observables.csv", cfg, series.times, sites, x_mean, x_err,
                      z_mean, z_err, 0, artifacts.files);
    // The master solve is the physical ensemble itself: unit weight.
    std::vector<double> ones(nt, 1.0), zeros(nt, 0.0);
    write_martingale(dir / "martingale.csv", series.times, ones, zeros, artifacts.files);
    write_jumps(dir / "jumps.csv", nullptr, artifacts.files);
  } else {
    EnsembleOptions opts;
    opts.n_traj = cfg.n_traj;
    opts.base_seed = cfg.base_seed;
    opts.workers = cfg.workers;
    opts.backend = cfg.mode == RunMode::Tjm ? TrajectoryBackend::TensorNetwork
                                            : TrajectoryBackend::DenseStateVector;
    const EnsembleResult ens = run_ensemble(ctx, opts);
    artifacts.n_traj = ens.n_traj;
    artifacts.coarse_dp_warnings = ens.coarse_dp_warnings;
    artifacts.n_failed = static_cast<int>(ens.failures.size());
    write_observables(dir / "observables.csv", cfg, ens.times, ens.sites, ens.x_mean,
                      ens.x_stderr, ens.z_mean, ens.z_stderr, ens.n_traj, artifacts.files);
    write_martingale(dir / "martingale.csv", ens.times, ens.mu_mean, ens.mu_var,
                     artifacts.files);
    write_jumps(dir / "jumps.csv", &ens, artifacts.files);
  }

  const auto t1 = std::chrono::steady_clock::now();
  artifacts.wall_seconds = std::chrono::duration<double>(t1 - t0).count();

  nlohmann::json meta;
  meta["config_toml"] = serialize_config(cfg);
  meta["mode"] = to_string(cfg.mode);
  meta["base_seed"] = cfg.base_seed;
  meta["n_traj"] = artifacts.n_traj;
  meta["n_failed_trajectories"] = artifacts.n_failed;
  meta["wall_time_seconds"] = artifacts.wall_seconds;
  meta["versions"] = {{"tjm", kVersion}, {"config_schema", 1}};
  meta["warnings"] = nlohmann::json::array();
  if (artifacts.coarse_grid_warning) {
    meta["warnings"].push_back(
        "per-step jump intensity exceeds 0.1; the time step is coarse for "
        "one-jump-per-step sampling");
  }
  if (artifacts.coarse_dp_warnings > 0) {
    meta["warnings"].push_back("delta_p exceeded 0.1 on " +
                               std::to_string(artifacts.coarse_dp_warnings) + " steps");
  }

  {
    auto out = open_out(dir / "run.json", artifacts.files);
    out << meta.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + (dir / "run.json").string());
  }
  return artifacts;
}

}  // namespace tjm
