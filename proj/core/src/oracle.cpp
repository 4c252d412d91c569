#include "tjm/oracle.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "tjm/linalg.hpp"

namespace tjm {
namespace oracle {

namespace {

using MatrixRM =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using VectorC = Eigen::Matrix<Complex, Eigen::Dynamic, 1>;

MatrixRM kron(const MatrixRM& a, const MatrixRM& b) {
  MatrixRM out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

MatrixRM pauli(char which) {
  MatrixRM m(2, 2);
  switch (which) {
    case 'x': m << 0, 1, 1, 0; break;
    case 'z': m << 1, 0, 0, -1; break;
    default: throw std::invalid_argument("pauli: unknown label");
  }
  return m;
}

MatrixRM site_operator(const MatrixRM& op, int site, int n) {
  MatrixRM out = MatrixRM::Identity(1, 1);
  for (int k = 0; k < n; ++k) {
    out = kron(out, k == site ? op : MatrixRM::Identity(2, 2));
  }
  return out;
}

MatrixRM channel_matrix(const NoiseChannel& ch, int n) {
  MatrixRM local(2, 2);
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) local(i, j) = ch.op.at({i, j});
  }
  return site_operator(local, ch.site, n);
}

// Applies a 2x2 operator to one site of a dense state vector in place.
void apply_site_2x2(VectorC& psi, const MatrixRM& op, int site, int n) {
  const std::int64_t stride = std::int64_t{1} << (n - 1 - site);
  const std::int64_t dim = psi.size();
  for (std::int64_t base = 0; base < dim; ++base) {
    if (base & stride) continue;  // handle each (0,1) pair once
    const Complex a = psi[base];
    const Complex b = psi[base | stride];
    psi[base] = op(0, 0) * a + op(0, 1) * b;
    psi[base | stride] = op(1, 0) * a + op(1, 1) * b;
  }
}

struct DenseChannels {
  std::vector<MatrixRM> ops;       // full-space c * L per channel
  std::vector<MatrixRM> local;     // 2x2 raw L per channel
  std::vector<double> c2;          // squared norm factors
};

DenseChannels expand_channels(const SimContext& ctx, int n) {
  DenseChannels dc;
  for (const auto& ch : ctx.channels) {
    MatrixRM local(2, 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) local(i, j) = ch.op.at({i, j});
    }
    dc.local.push_back(local);
    dc.ops.push_back(ch.norm_factor * channel_matrix(ch, n));
    dc.c2.push_back(ch.norm_factor * ch.norm_factor);
  }
  return dc;
}

}  // namespace

std::vector<Complex> dense_tfi(int n, double j_coupling, double g_field) {
  const std::int64_t dim = std::int64_t{1} << n;
  MatrixRM h = MatrixRM::Zero(dim, dim);
  for (int i = 0; i < n; ++i) {
    h -= g_field * site_operator(pauli('x'), i, n);
  }
  for (int i = 0; i + 1 < n; ++i) {
    h -= j_coupling *
         (site_operator(pauli('z'), i, n) * site_operator(pauli('z'), i + 1, n));
  }
  return std::vector<Complex>(h.data(), h.data() + dim * dim);
}

std::vector<Complex> dense_initial_state(const SimContext& ctx) {
  const std::int64_t dim = std::int64_t{1} << ctx.n_sites;
  std::vector<Complex> psi(dim, 0.0);
  if (ctx.initial_state == InitialState::AllPlus) {
    const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
    for (auto& v : psi) v = amp;
  } else {
    psi[0] = 1.0;
  }
  return psi;
}

MasterSeries integrate_master(const SimContext& ctx, int substeps) {
  const auto psi = dense_initial_state(ctx);
  const std::int64_t dim = static_cast<std::int64_t>(psi.size());
  std::vector<Complex> rho0(dim * dim, 0.0);
  for (std::int64_t i = 0; i < dim; ++i) {
    for (std::int64_t j = 0; j < dim; ++j) rho0[i * dim + j] = psi[i] * std::conj(psi[j]);
  }
  return integrate_master_from(ctx, rho0, substeps);
}

MasterSeries integrate_master_from(const SimContext& ctx, const std::vector<Complex>& rho0,
                                   int substeps) {
  const int n = ctx.n_sites;
  if (n > 6) throw std::invalid_argument("integrate_master: capped at 6 sites");
  if (substeps < 1) throw std::invalid_argument("integrate_master: substeps must be >= 1");
  const std::int64_t dim = std::int64_t{1} << n;
  if (static_cast<std::int64_t>(rho0.size()) != dim * dim) {
    throw std::invalid_argument("integrate_master: rho0 dimension mismatch");
  }

  const auto hvec = dense_tfi(n, ctx.j_coupling, ctx.g_field);
  Eigen::Map<const MatrixRM> h(hvec.data(), dim, dim);
  const DenseChannels dc = expand_channels(ctx, n);
  const std::size_t n_kinds = ctx.kinds.size();

  std::vector<MatrixRM> ldl;  // A^dag A per channel (without rates)
  for (const auto& a : dc.ops) ldl.push_back(a.adjoint() * a);

  auto liouvillian = [&](const MatrixRM& rho, double t) -> MatrixRM {
    MatrixRM out = Complex(0, -1) * (h * rho - rho * h);
    if (!dc.ops.empty()) {
      const auto rates = ctx.rates_at(t);
      for (std::size_t k = 0; k < dc.ops.size(); ++k) {
        const double g = rates.gamma[k % n_kinds];
        if (g == 0.0) continue;
        out += g * (dc.ops[k] * rho * dc.ops[k].adjoint() -
                    0.5 * (ldl[k] * rho + rho * ldl[k]));
      }
    }
    return out;
  };

  MatrixRM rho(dim, dim);
  for (std::int64_t i = 0; i < dim; ++i) {
    for (std::int64_t j = 0; j < dim; ++j) rho(i, j) = rho0[i * dim + j];
  }

  MasterSeries series;
  series.n_sites = n;
  series.dim = dim;

  auto snapshot = [&](double t) {
    series.times.push_back(t);
    series.rho.emplace_back(rho.data(), rho.data() + dim * dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho);
    series.min_eigenvalues.push_back(es.eigenvalues().minCoeff());
  };

  snapshot(0.0);
  const double h_sub = ctx.dt / substeps;
  for (int j = 0; j < ctx.n_steps; ++j) {
    for (int s = 0; s < substeps; ++s) {
      const double t = j * ctx.dt + s * h_sub;
      const MatrixRM k1 = liouvillian(rho, t);
      const MatrixRM k2 = liouvillian(rho + 0.5 * h_sub * k1, t + 0.5 * h_sub);
      const MatrixRM k3 = liouvillian(rho + 0.5 * h_sub * k2, t + 0.5 * h_sub);
      const MatrixRM k4 = liouvillian(rho + h_sub * k3, t + h_sub);
      rho += (h_sub / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    series.max_trace_drift =
        std::max(series.max_trace_drift, std::abs(rho.trace().real() - 1.0) +
                                             std::abs(rho.trace().imag()));
    const int step = j + 1;
    if (step == ctx.n_steps || step % ctx.sample_stride == 0) {
      snapshot(step * ctx.dt);
    }
  }
  return series;
}

double master_expect_x(const MasterSeries& series, int snapshot, int site) {
  Eigen::Map<const MatrixRM> rho(series.rho.at(snapshot).data(), series.dim, series.dim);
  const MatrixRM xs = site_operator(pauli('x'), site, series.n_sites);
  return (rho * xs).trace().real();
}

double master_expect_z(const MasterSeries& series, int snapshot, int site) {
  Eigen::Map<const MatrixRM> rho(series.rho.at(snapshot).data(), series.dim, series.dim);
  const MatrixRM zs = site_operator(pauli('z'), site, series.n_sites);
  return (rho * zs).trace().real();
}

Complex master_coherence(const MasterSeries& series, int snapshot) {
  if (series.dim != 2) throw std::invalid_argument("master_coherence: single qubit only");
  return series.rho.at(snapshot)[1];  // <0|rho|1>
}

TrajectorySamples dense_trajectory(const SimContext& ctx, std::uint64_t base_seed,
                                   std::uint32_t trajectory_index) {
  const int n_sites = ctx.n_sites;
  if (n_sites > 12) throw std::invalid_argument("dense_trajectory: capped at 12 sites");
  const std::int64_t dim = std::int64_t{1} << n_sites;
  const int n = ctx.n_steps;
  const std::size_t n_kinds = ctx.kinds.size();
  const bool second_order = ctx.tweaks.trotter_order != 1;

  // U(dt) once (H is time independent), site dissipators per step.
  const auto hvec = dense_tfi(n_sites, ctx.j_coupling, ctx.g_field);
  const DenseTensor hten({dim, dim}, hvec);
  const DenseTensor uten = expm_dense(hten, Complex(0.0, -ctx.dt));
  Eigen::Map<const MatrixRM> u(uten.data().data(), dim, dim);

  const auto psi0 = dense_initial_state(ctx);
  VectorC psi = Eigen::Map<const VectorC>(psi0.data(), dim);

  RandomStream rng(base_seed, trajectory_index);
  double mu = 1.0;
  std::vector<JumpEvent> jump_log;

  auto dissipator_2x2 = [&](double t_mid, double span) -> MatrixRM {
    const auto rates = ctx.rates_at(t_mid);
    const DenseTensor d = dissipator_site_factor(
        std::span(ctx.channels).first(n_kinds), rates.rate, span);
    MatrixRM m(2, 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) m(i, j) = d.at({i, j});
    }
    return m;
  };

  auto planned = [&](int j) {
    StepOperators so = step_operators(j, n, ctx.dt);
    if (!second_order) {
      if (j == 0) {
        so.has_unitary = false;
        so.dissipation_span = 0.0;
      } else {
        so.role = StepOperators::Role::Bulk;
        so.has_unitary = true;
        so.dissipation_span = ctx.dt;
        so.t_mid = (j - 0.5) * ctx.dt;
      }
    }
    return so;
  };

  TrajectorySamples out;
  const auto sample_sites = ctx.resolved_sample_sites();
  const MatrixRM px = pauli('x'), pz = pauli('z');

  auto record = [&](double t, bool needs_correction) {
    VectorC copy = psi;
    out.norm2.push_back(copy.squaredNorm());
    copy.normalize();
    if (needs_correction) {
      copy = u * copy;
      if (!ctx.channels.empty()) {
        const MatrixRM d = dissipator_2x2(t - 0.25 * ctx.dt, 0.5 * ctx.dt);
        for (int s = 0; s < n_sites; ++s) apply_site_2x2(copy, d, s, n_sites);
      }
      copy.normalize();
    }
    std::vector<double> xs, zs;
    for (int site : sample_sites) {
      VectorC tmp = copy;
      apply_site_2x2(tmp, px, site, n_sites);
      xs.push_back(copy.dot(tmp).real());
      if (ctx.measure_z) {
        tmp = copy;
        apply_site_2x2(tmp, pz, site, n_sites);
        zs.push_back(copy.dot(tmp).real());
      }
    }
    out.times.push_back(t);
    out.mu.push_back(mu);
    out.x.push_back(std::move(xs));
    if (ctx.measure_z) out.z.push_back(std::move(zs));
  };

  auto run_step = [&](int j) {
    const StepOperators so = planned(j);
    psi.normalize();
    if (so.has_unitary) psi = u * psi;
    if (!ctx.channels.empty() && so.dissipation_span > 0.0) {
      const MatrixRM d = dissipator_2x2(so.t_mid, so.dissipation_span);
      for (int s = 0; s < n_sites; ++s) apply_site_2x2(psi, d, s, n_sites);
    }

    bool coarse = false;
    const double dp = jump_probability(1.0, psi.squaredNorm(), &coarse);
    if (coarse) ++out.coarse_dp_warnings;

    std::optional<int> jump;
    if (!ctx.tweaks.disable_jumps && !ctx.channels.empty()) {
      const double eps = rng.uniform();
      if (eps < dp) {
        const auto rates = ctx.rates_at(so.t_mid);
        const double n2 = psi.squaredNorm();
        std::vector<double> weights(ctx.channels.size());
        double total = 0.0;
        for (std::size_t c = 0; c < ctx.channels.size(); ++c) {
          const auto& ch = ctx.channels[c];
          VectorC tmp = psi;
          MatrixRM local(2, 2);
          for (int i = 0; i < 2; ++i) {
            for (int k = 0; k < 2; ++k) local(i, k) = ch.op.at({i, k});
          }
          apply_site_2x2(tmp, local, ch.site, n_sites);
          const double w = rates.rate[c % n_kinds] * ch.norm_factor * ch.norm_factor *
                           tmp.squaredNorm() / n2;
          weights[c] = w;
          total += w;
        }
        if (total <= 0.0) {
          throw std::runtime_error("dense_trajectory: inconsistent jump weights");
        }
        const double pick = rng.uniform() * total;
        double cum = 0.0;
        int chosen = static_cast<int>(weights.size()) - 1;
        for (std::size_t c = 0; c < weights.size(); ++c) {
          cum += weights[c];
          if (pick < cum) {
            chosen = static_cast<int>(c);
            break;
          }
        }
        const auto& ch = ctx.channels[chosen];
        MatrixRM local(2, 2);
        for (int i = 0; i < 2; ++i) {
          for (int k = 0; k < 2; ++k) local(i, k) = ch.op.at({i, k});
        }
        apply_site_2x2(psi, local, ch.site, n_sites);
        const double nn = psi.norm();
        if (nn <= 0.0) throw std::runtime_error("dense_trajectory: jump annihilated state");
        psi /= nn;
        jump_log.push_back({j, chosen});
        jump = chosen;
      }
    }

    if (!ctx.channels.empty()) {
      const auto rates = ctx.rates_at(so.t_mid);
      if (rates.shift != 0.0) mu *= std::exp(rates.shift * so.dissipation_span);
      if (jump) {
        const std::size_t kind_idx = *jump % n_kinds;
        double ratio = rates.gamma[kind_idx] / rates.rate[kind_idx];
        ratio *= ctx.tweaks.jump_ratio_scale;
        if (ratio != 1.0) mu *= ratio;
      }
    }
  };

  record(0.0, false);
  run_step(0);
  for (int j = 1; j < n; ++j) {
    if (j % ctx.sample_stride == 0) record(j * ctx.dt, second_order);
    run_step(j);
  }
  run_step(n);
  record(n * ctx.dt, false);

  out.jumps = std::move(jump_log);
  return out;
}

}  // namespace oracle
}  // namespace tjm
