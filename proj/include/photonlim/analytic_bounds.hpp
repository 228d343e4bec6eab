/* Copyright 2026 The photonlim Authors. All Rights Reserved.
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "roots.hpp"

namespace photonlim {

/// Closed-form bounds on Lambda-system extraction within a window T.
///
/// The optimal relaxed wavepacket is alpha_g(t) = A sin(omega_m t). The upper
/// bound normalises it so that P_k + P_g + P_gamma = 1 at T; the lower bound
/// keeps the shape and rescales until the total non-initial probability
/// (including P_e) peaks at exactly one.
struct AnalyticBoundResult {
  double omega_m = 0.0;
  double m = 0.0;
  double q = 0.0;               ///< stationarity scalar, equal to m at the solution
  double amplitude_upper = 0.0; ///< A for the upper-bound normalisation
  double scale_lower = 1.0;     ///< A_lower / A_upper, in (0, 1]
  double p_upper = 0.0;
  double p_lower = 0.0;
  double T = 0.0;
  double t_peak = 0.0;          ///< where the unit-amplitude total peaks (lower bound only)
  bool resolution_warning = false;

  double amplitude_lower() const noexcept { return amplitude_upper * scale_lower; }
};

struct BoundProbabilities {
  double kappa = 0.0; ///< cavity emission so far
  double g = 0.0;     ///< cavity occupation
  double gamma = 0.0; ///< spontaneous emission so far
  double e = 0.0;     ///< excited-state occupation

  double total() const noexcept { return kappa + g + gamma + e; }
};

enum class BoundKind { upper, lower };

namespace detail {
/// omega / (kappa (1 + C)), the coefficient in the omega restriction.
inline double restriction_coefficient(const SystemParams &p) {
  return 1.0 / (p.kappa() * (1.0 + cooperativity(p, 0)));
}

/// (sinh(y)/y - 1) / y^2 without cancellation for small y.
inline double sinhc_excess(double y) {
  if (std::abs(y) < 0.5) {
    const double y2 = y * y;
    double term = 1.0 / 6.0, sum = 0.0;
    for (int k = 1; k < 20; ++k) {
      sum += term;
      term *= y2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
    }
    return sum;
  }
  return (std::sinh(y) / y - 1.0) / (y * y);
}
} // namespace detail

/// LHS - 1 of cos(2wT) - [2w / (2 kappa (1+C))] sin(2wT) = 1.
inline double omega_restriction_residual(const SystemParams &p, double T, double omega) {
  const double b = omega * detail::restriction_coefficient(p);
  return std::cos(2.0 * omega * T) - b * std::sin(2.0 * omega * T) - 1.0;
}

/// Smallest nontrivial root of the omega restriction, in (0, pi/T).
///
/// The residual factors as -2 sin(wT) [sin(wT) + b cos(wT)]; the first factor
/// carries the roots at 0 and pi/T, so the scan runs on the second one.
inline double solve_omega_m(const SystemParams &p, double T) {
  detail::require_lambda(p, "solve_omega_m");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("extraction time must be positive");
  const double c = detail::restriction_coefficient(p);
  auto reduced = [&](double w) { return std::sin(w * T) + c * w * std::cos(w * T); };
  const double w_hi = std::numbers::pi / T;

  auto br = roots::first_sign_change(reduced, 0.0, w_hi, 10000);
  // For large T the root sits closer to pi/T than one scan step; the reduced
  // factor is nonzero at pi/T itself, so the last cell closes the bracket.
  const double w_last = w_hi * 10000.0 / 10001.0;
  if (!br && (reduced(w_last) < 0.0) != (reduced(w_hi) < 0.0)) br = roots::Bracket{w_last, w_hi};
  if (!br) {
    std::vector<double> trace;
    for (int i = 1; i < 10; ++i)
      trace.push_back(omega_restriction_residual(p, T, w_hi * i / 10.0));
    throw NumericalFailure("no root of the omega restriction in (0, pi/T)", trace);
  }
  const double w = roots::bisect(reduced, *br, 1e-14);
  const double res = omega_restriction_residual(p, T, w);
  if (!(std::abs(res) < 1e-12) || !(w < w_hi))
    throw NumericalFailure("omega restriction residual too large: " + std::to_string(res),
                           {reduced(br->lo), reduced(br->hi), res});
  return w;
}

/// Closed-form probabilities of alpha_g = A sin(omega t) at time t.
inline BoundProbabilities bound_probabilities(const SystemParams &p, double omega,
                                              double amplitude, double t) {
  const double k = p.kappa(), g = p.channel(0).coupling;
  const double inv2c = 1.0 / (2.0 * cooperativity(p, 0));
  const double a2 = amplitude * amplitude;
  const double s = std::sin(omega * t), co = std::cos(omega * t);
  const double s2w = std::sin(2.0 * omega * t) / (2.0 * omega);
  BoundProbabilities out;
  out.kappa = a2 * k * (t - s2w);
  out.g = a2 * s * s;
  out.gamma = out.kappa * inv2c +
              a2 * (2.0 * inv2c * s * s + omega * omega / (k * k) * inv2c * k * (t + s2w));
  const double ae = (omega * co + k * s) / g;
  out.e = a2 * ae * ae;
  return out;
}

inline AnalyticBoundResult upper_bound(const SystemParams &p, double T) {
  AnalyticBoundResult r;
  r.T = T;
  r.omega_m = solve_omega_m(p, T);
  const double k = p.kappa();
  r.m = ((r.omega_m / k) * (r.omega_m / k) + 1.0) / (2.0 * cooperativity(p, 0));
  r.q = r.m;
  r.p_upper = 1.0 / (1.0 + r.m);
  const auto unit = bound_probabilities(p, r.omega_m, 1.0, T);
  r.amplitude_upper = 1.0 / std::sqrt(unit.kappa + unit.g + unit.gamma);
  r.p_lower = r.p_upper;
  r.t_peak = T;
  return r;
}

/// Upper bound plus the rescaled lower bound. `grid_points` uniform samples on
/// [0, T] locate the peak of the total, refined by golden section.
inline AnalyticBoundResult lower_bound(const SystemParams &p, double T,
                                       std::size_t grid_points = 10001, bool strict = false) {
  if (grid_points < 3) throw ConfigurationError("lower_bound needs at least 3 grid points");
  AnalyticBoundResult r = upper_bound(p, T);
  auto total = [&](double t) { return bound_probabilities(p, r.omega_m, 1.0, t).total(); };

  const double dt = T / static_cast<double>(grid_points - 1);
  std::size_t k_best = 0;
  double best = -1.0;
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double v = total(dt * static_cast<double>(i));
    if (v >= best) {
      best = v;
      k_best = i;
    }
  }
  double t_peak = dt * static_cast<double>(k_best);
  const double a = k_best == 0 ? 0.0 : t_peak - dt;
  const double b = k_best + 1 == grid_points ? T : t_peak + dt;
  const auto [t_ref, v_ref] = roots::golden_maximum(total, a, b);
  if (v_ref > best) {
    best = v_ref;
    t_peak = t_ref;
  }

  const double per_period = 2.0 * std::numbers::pi / (r.omega_m * dt);
  r.resolution_warning = per_period < 200.0;
  if (r.resolution_warning && strict)
    throw AccuracyError("lower-bound grid resolves fewer than 200 points per period");

  const auto unit_T = bound_probabilities(p, r.omega_m, 1.0, T);
  r.p_lower = unit_T.kappa / best;
  r.scale_lower = std::sqrt((unit_T.kappa + unit_T.g + unit_T.gamma) / best);
  r.t_peak = t_peak;
  return r;
}

inline std::vector<BoundProbabilities> bound_trajectories(const SystemParams &p,
                                                          const AnalyticBoundResult &r,
                                                          std::span<const double> times,
                                                          BoundKind which) {
  const double amp = which == BoundKind::upper ? r.amplitude_upper : r.amplitude_lower();
  std::vector<BoundProbabilities> out;
  out.reserve(times.size());
  for (double t : times) {
    if (t < 0.0 || t > r.T * (1.0 + 1e-12))
      throw DomainError("trajectory time " + std::to_string(t) + " outside [0, T]");
    out.push_back(bound_probabilities(p, r.omega_m, amp, t));
  }
  return out;
}

/// alpha_g(t) of the bound wavepacket (real for these shapes).
inline double bound_wavepacket(const AnalyticBoundResult &r, double t, BoundKind which) {
  const double amp = which == BoundKind::upper ? r.amplitude_upper : r.amplitude_lower();
  return amp * std::sin(r.omega_m * t);
}

/// m for the hyperbolic-sine stationary shape, valid for q < 1/(2C).
///
/// m - 1/(2C) = [(1 + 2 gamma kappa / g^2) sinh^2(sT) + (gamma/g^2)(sinh(2sT)/(2s) + T)]
///              / [kappa (sinh(2sT)/(2s) - T)],  s = kappa sqrt(1 - 2Cq).
/// Every term is evaluated divided by s^2 so the s -> 0 limit stays finite.
inline double hyperbolic_m(const SystemParams &p, double T, double q) {
  detail::require_lambda(p, "hyperbolic_m");
  if (!(T > 0.0)) throw DomainError("hyperbolic_m needs T > 0");
  const double C = cooperativity(p, 0);
  if (!(2.0 * C * q - 1.0 < 0.0)) throw DomainError("hyperbolic_m needs q < 1/(2C)");
  const double k = p.kappa(), g2 = std::pow(p.channel(0).coupling, 2), gam = p.gamma();
  const double s = k * std::sqrt(1.0 - 2.0 * C * q);
  const double x = s * T;

  // sinh^2(x)/s^2, (sinh(2x)/(2s) - T)/s^2 and s^2 * (sinh(2x)/(2s) + T)/s^2.
  // Past x = 20 all three are carried with a common factor exp(-2x) removed.
  double sinh2_over_s2, qminus_over_s2, qplus;
  if (x > 20.0) {
    const double e2 = std::exp(-2.0 * x), e4 = e2 * e2;
    sinh2_over_s2 = (1.0 - e2) * (1.0 - e2) / (4.0 * s * s);
    qminus_over_s2 = ((1.0 - e4) / (4.0 * s) - T * e2) / (s * s);
    qplus = (1.0 - e4) / (4.0 * s) + T * e2;
  } else {
    const double sh = x < 1e-8 ? T : std::sinh(x) / s;
    sinh2_over_s2 = sh * sh;
    qminus_over_s2 = 4.0 * T * T * T * detail::sinhc_excess(2.0 * x);
    qplus = T * (2.0 + 4.0 * x * x * detail::sinhc_excess(2.0 * x));
  }

  const double num = (1.0 + 2.0 * gam * k / g2) * sinh2_over_s2 + gam / g2 * qplus;
  return 1.0 / (2.0 * C) + num / (k * qminus_over_s2);
}

} // namespace photonlim
