#pragma once

#include <span>
#include <string>
#include <vector>

#include "tjm/tensor.hpp"

namespace tjm {

enum class ChannelKind { Dephasing, Excitation, Relaxation };

std::string to_string(ChannelKind kind);

/// Raw (unnormalized) jump operator of a channel kind: Z, sigma+ or
/// sigma- in the basis |0> = (1,0)^T.
DenseTensor channel_op(ChannelKind kind);

/// Time-dependent decay rate gamma(t). The damped-oscillatory form is
///   gamma(t) = gamma_inf - B exp(-f_cubic_coeff t^3) sin(omega t),
/// which dips below zero for strong enough oscillation amplitude; the
/// constant form must be non-negative.
struct RateSchedule {
  enum class Kind { Constant, DampedOscillatory };
  Kind kind = Kind::Constant;
  double gamma_inf = 0.0;
  double amplitude = 0.0;      // B
  double omega = 0.0;
  double f_cubic_coeff = 0.0;  // f(t) = c t^3

  bool operator==(const RateSchedule&) const = default;
};

double gamma_at(const RateSchedule& schedule, double t);

/// Positivity shift C_t = -2 min(0, rates...). Zero when every rate is
/// non-negative; otherwise large enough that every shifted rate
/// gamma + C_t is strictly positive.
double rate_shift(std::span<const double> rates);

/// One jump channel: a site-local operator together with the scalar
/// normalization that makes the full channel set satisfy
/// sum_k c_k^2 L_k^dag L_k = identity over the whole chain.
struct NoiseChannel {
  ChannelKind kind;
  int site = -1;
  DenseTensor op;            // raw 2x2 operator
  double norm_factor = 1.0;  // c
  RateSchedule schedule;
};

/// Expands per-kind channel templates (site < 0) into the full site x kind
/// channel list, ordered site-major, with norm factors solving the
/// completeness condition exactly. Throws std::invalid_argument when the
/// kind set cannot satisfy it (e.g. excitation without relaxation).
std::vector<NoiseChannel> normalize_channels(const std::vector<NoiseChannel>& kind_templates,
                                             int n_sites);

/// Site-local non-unitary factor D_l(dt) = exp(-(dt/2) sum_k r_k c_k^2
/// L_k^dag L_k) for the channels acting on one site. `rates` are the
/// effective (already shifted) rates aligned with `channels_at_site` and
/// must be non-negative.
DenseTensor dissipator_site_factor(std::span<const NoiseChannel> channels_at_site,
                                   std::span<const double> rates, double dt);

}  // namespace tjm
