#include "tjm/noise.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

#include "tjm/linalg.hpp"

namespace tjm {

std::string to_string(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Dephasing: return "dephasing";
    case ChannelKind::Excitation: return "excitation";
    case ChannelKind::Relaxation: return "relaxation";
  }
  return "unknown";
}

DenseTensor channel_op(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::Dephasing: return DenseTensor::matrix2(1, 0, 0, -1);
    case ChannelKind::Excitation: return DenseTensor::matrix2(0, 0, 1, 0);
    case ChannelKind::Relaxation: return DenseTensor::matrix2(0, 1, 0, 0);
  }
  throw std::invalid_argument("channel_op: unknown kind");
}

double gamma_at(const RateSchedule& schedule, double t) {
  if (t < 0) throw std::invalid_argument("gamma_at: negative time");
  switch (schedule.kind) {
    case RateSchedule::Kind::Constant:
      return schedule.gamma_inf;
    case RateSchedule::Kind::DampedOscillatory:
      return schedule.gamma_inf -
             schedule.amplitude * std::exp(-schedule.f_cubic_coeff * t * t * t) *
                 std::sin(schedule.omega * t);
  }
  throw std::invalid_argument("gamma_at: unknown schedule kind");
}

double rate_shift(std::span<const double> rates) {
  double lowest = 0.0;
  for (double r : rates) lowest = std::min(lowest, r);
  return -2.0 * lowest;
}

std::vector<NoiseChannel> normalize_channels(const std::vector<NoiseChannel>& kind_templates,
                                             int n_sites) {
  if (n_sites < 1) throw std::invalid_argument("normalize_channels: empty chain");
  if (kind_templates.empty()) return {};

  std::set<ChannelKind> seen;
  DenseTensor sum({2, 2});
  for (const auto& ch : kind_templates) {
    if (!seen.insert(ch.kind).second) {
      throw std::invalid_argument("normalize_channels: duplicate channel kind " +
                                  to_string(ch.kind));
    }
    const DenseTensor& l = ch.op;
    if (l.rank() != 2 || l.dim(0) != 2 || l.dim(1) != 2) {
      throw std::invalid_argument("normalize_channels: channel operator must be 2x2");
    }
    sum = add(sum, contract(l.conjugated(), l, {{0, 0}}));  // L^dag L
  }

  // The per-site sum of L^dag L must be proportional to the identity,
  // otherwise no uniform scaling can satisfy the completeness condition.
  const Complex s00 = sum.at({0, 0});
  const Complex s11 = sum.at({1, 1});
  const double off = std::abs(sum.at({0, 1})) + std::abs(sum.at({1, 0}));
  if (off > 1e-12 || std::abs(s00 - s11) > 1e-12 || s00.real() <= 0.0) {
    throw std::invalid_argument(
        "normalize_channels: channel set cannot satisfy the completeness "
        "condition; sum L^dag L per site is not proportional to the identity "
        "(excitation and relaxation channels must be paired)");
  }

  const double c = 1.0 / std::sqrt(s00.real() * n_sites);
  std::vector<NoiseChannel> out;
  out.reserve(static_cast<std::size_t>(n_sites) * kind_templates.size());
  for (int site = 0; site < n_sites; ++site) {
    for (const auto& ch : kind_templates) {
      NoiseChannel expanded = ch;
      expanded.site = site;
      expanded.norm_factor = c;
      out.push_back(std::move(expanded));
    }
  }
  return out;
}

DenseTensor dissipator_site_factor(std::span<const NoiseChannel> channels_at_site,
                                   std::span<const double> rates, double dt) {
  if (channels_at_site.size() != rates.size()) {
    throw std::invalid_argument("dissipator_site_factor: rate count mismatch");
  }
  DenseTensor gen({2, 2});
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (rates[i] < 0) {
      throw std::invalid_argument(
          "dissipator_site_factor: negative effective rate; the positivity "
          "shift must be applied upstream");
    }
    const auto& ch = channels_at_site[i];
    DenseTensor ldl = contract(ch.op.conjugated(), ch.op, {{0, 0}});
    ldl.scale(rates[i] * ch.norm_factor * ch.norm_factor);
    gen = add(gen, ldl);
  }
  return expm_dense(gen, Complex(-0.5 * dt, 0.0));
}

}  // namespace tjm
