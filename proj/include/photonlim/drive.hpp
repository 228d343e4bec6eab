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

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "dynamics.hpp"
#include "errors.hpp"
#include "grid.hpp"
#include "interp.hpp"
#include "model.hpp"
#include "projection.hpp"
#include "spectral.hpp"

namespace photonlim {

/// Cavity-state amplitudes alpha_gj(t) with derivatives up to third order.
class Wavepacket {
public:
  virtual ~Wavepacket() = default;
  virtual std::size_t channel_count() const = 0;
  /// {alpha, alpha', alpha'', alpha'''} of channel j at time t.
  virtual std::array<cplx, 4> derivatives(std::size_t j, double t) const = 0;
};

/// A sin(omega t) in a single channel, as produced by the analytic bounds.
class SineWavepacket final : public Wavepacket {
public:
  SineWavepacket(double amplitude, double omega) : a_(amplitude), w_(omega) {}
  std::size_t channel_count() const override { return 1; }
  std::array<cplx, 4> derivatives(std::size_t j, double t) const override {
    if (j != 0) throw IndexError("sine wavepacket has one channel");
    const double s = std::sin(w_ * t), c = std::cos(w_ * t);
    return {a_ * s, a_ * w_ * c, -a_ * w_ * w_ * s, -a_ * w_ * w_ * w_ * c};
  }

private:
  double a_, w_;
};

/// Every channel of a Fourier-space solution, synthesized on demand.
class FourierWavepacket final : public Wavepacket {
public:
  FourierWavepacket(const FourierVector &v, const SystemParams &p) : basis_(v.basis) {
    if (static_cast<std::size_t>(v.coefficients.size()) != basis_.size())
      throw UsageError("Fourier vector length does not match its basis");
    for (std::size_t j = 0; j < p.channel_count(); ++j)
      weighted_.push_back(conversion_factors(basis_, p, j).cwiseProduct(v.coefficients) /
                          std::sqrt(basis_.period()));
  }
  std::size_t channel_count() const override { return weighted_.size(); }
  std::array<cplx, 4> derivatives(std::size_t j, double t) const override {
    const CVector &a = weighted_.at(j);
    std::array<cplx, 4> out{};
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const double w = basis_.omega_at(i);
      cplx term = a[static_cast<Eigen::Index>(i)] * std::polar(1.0, w * t);
      for (auto &o : out) {
        o += term;
        term *= cplx(0.0, w);
      }
    }
    return out;
  }

private:
  FourierBasis basis_;
  std::vector<CVector> weighted_;
};

inline constexpr double kMinRecommendedChi = 0.02;
inline constexpr double kDefaultChiBound = 0.02;
inline constexpr double kDefaultChiNumeric = 0.05;

/// Sampled complex drive.
struct DrivePulse {
  std::vector<double> times;
  std::vector<cplx> omega;
  double theta0 = 0.0;
  double chi = 0.0;
  cplx initial_excited_amplitude{};
  cplx initial_ground_amplitude{};
  bool chi_warning = false; ///< chi below the smallest recommended margin

  double max_abs() const {
    double m = 0.0;
    for (const auto &o : omega) m = std::max(m, std::abs(o));
    return m;
  }
  double max_abs_imag() const {
    double m = 0.0;
    for (const auto &o : omega) m = std::max(m, std::abs(o.imag()));
    return m;
  }
  /// Continuous drive by monotone cubic interpolation of the samples.
  DriveFunction interpolant() const {
    auto f = std::make_shared<ComplexPchip>(times, omega);
    return [f](double t) { return (*f)(t); };
  }
};

namespace detail {
/// X and Z of the scaled wavepacket: alpha_e = -Z / g_1 and Omega alpha_u = -X / g_1.
struct DriveTerms {
  cplx X, Z, alpha_e, alpha_e_dot, coupled;
};

inline DriveTerms drive_terms(const Wavepacket &wp, const SystemParams &p, const DriveContext &ctx,
                              double scale, double t) {
  const double g1 = p.channel(0).coupling;
  const cplx kt(p.kappa(), p.channel(0).detuning);
  const cplx gt(p.gamma(), ctx.delta_e);
  auto d = wp.derivatives(0, t);
  for (auto &x : d) x *= scale;
  cplx coupled = 0.0;
  for (std::size_t j = 0; j < p.channel_count(); ++j)
    coupled += p.channel(j).coupling * (j == 0 ? d[0] : scale * wp.derivatives(j, t)[0]);
  DriveTerms r;
  r.Z = kt * d[0] + d[1];
  const cplx zdot = kt * d[1] + d[2];
  r.X = zdot + gt * r.Z + g1 * coupled;
  r.alpha_e = -r.Z / g1;
  r.alpha_e_dot = -zdot / g1;
  r.coupled = coupled;
  return r;
}
} // namespace detail

/// Drive that realizes (1 - chi) times the given wavepacket.
///
/// With beta = -g_1 alpha_u the drive is Omega = X / beta, and beta obeys
///   beta' = -i Delta_u beta - conj(X) Z / conj(beta),
/// which stays regular where X vanishes. beta is integrated with RK4 on a grid
/// `refine` times denser than `grid`; the pulse is reported on that dense grid.
inline DrivePulse reconstruct_drive(const Wavepacket &wp, const SystemParams &p, const DriveContext &ctx,
                                    const std::vector<double> &grid, std::size_t refine = 4) {
  ctx.validate();
  if (wp.channel_count() != p.channel_count())
    throw UsageError("wavepacket and system have different channel counts");
  const double scale = 1.0 - ctx.chi;
  const double g1 = p.channel(0).coupling;
  const auto dense = refine_grid(grid, refine);
  const double h = uniform_step(dense);

  const auto t0 = detail::drive_terms(wp, p, ctx, scale, dense.front());
  const double pe0 = std::norm(t0.alpha_e);
  if (!(pe0 < 1.0))
    throw ReconstructionSingularity("initial excited population reaches one; increase chi", dense.front());

  DrivePulse pulse;
  pulse.times = dense;
  pulse.theta0 = ctx.theta0;
  pulse.chi = ctx.chi;
  pulse.chi_warning = ctx.chi < kMinRecommendedChi;
  pulse.initial_excited_amplitude = t0.alpha_e;
  pulse.initial_ground_amplitude = std::polar(std::sqrt(1.0 - pe0), ctx.theta0);

  const double floor = 1e-6 * std::abs(g1);
  using State = std::vector<cplx>;
  State beta{-g1 * pulse.initial_ground_amplitude};
  const cplx I(0.0, 1.0);
  double failed_at = -1.0;
  auto rhs = [&](const State &b, State &d, double t) {
    const auto terms = detail::drive_terms(wp, p, ctx, scale, t);
    if (std::abs(b[0]) < floor) {
      if (failed_at < 0.0) failed_at = t;
      d[0] = 0.0;
      return;
    }
    d[0] = -I * ctx.delta_u * b[0] - std::conj(terms.X) * terms.Z / std::conj(b[0]);
  };

  boost::numeric::odeint::runge_kutta4<State> stepper;
  pulse.omega.reserve(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (i > 0) stepper.do_step(rhs, beta, dense[i - 1], h);
    if (failed_at >= 0.0 || std::abs(beta[0]) < floor || !std::isfinite(std::abs(beta[0])))
      throw ReconstructionSingularity("ground-state amplitude vanished during reconstruction",
                                      failed_at >= 0.0 ? failed_at : dense[i]);
    pulse.omega.push_back(detail::drive_terms(wp, p, ctx, scale, dense[i]).X / beta[0]);
  }
  return pulse;
}

struct DriveResidual {
  double algebraic = 0.0;     ///< max |Omega alpha_u - (alpha_e' + gamma~ alpha_e - sum g a)| / max |rhs|
  double dynamic_l2 = 0.0;    ///< ||alpha_g1 simulated - target|| / ||target||
  double simulated_emission = 0.0; ///< total P_kappa at the last grid time
  double conservation = 0.0;
};

/// Simulates the pulse from the reconstruction's initial state and compares
/// the result with the (1 - chi)-scaled target on `grid`.
inline DriveResidual verify_drive(const DrivePulse &pulse, const SystemParams &p, const DriveContext &ctx,
                                  const Wavepacket &wp, const std::vector<double> &grid) {
  const double scale = 1.0 - pulse.chi;
  DriveContext sim = ctx;
  sim.omega = pulse.interpolant();
  InitialState init;
  init.u = pulse.initial_ground_amplitude;
  init.e = pulse.initial_excited_amplitude;
  IntegrationOptions opt;
  opt.substeps = std::max<std::size_t>(1, (pulse.times.size() - 1) / (grid.size() - 1));
  opt.drift_tolerance = 1e-4;
  const auto tr = integrate(p, sim, init, grid, opt);

  DriveResidual r;
  r.conservation = tr.max_conservation_error;
  r.simulated_emission = tr.emitted(grid.size() - 1);
  double num = 0.0, den = 0.0, alg = 0.0, alg_scale = 0.0;
  const cplx gt(p.gamma(), ctx.delta_e);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const cplx target = scale * wp.derivatives(0, grid[i])[0];
    num += std::norm(tr.alpha_g[0][i] - target);
    den += std::norm(target);
    const auto terms = detail::drive_terms(wp, p, ctx, scale, grid[i]);
    const cplx rhs = terms.alpha_e_dot + gt * terms.alpha_e - terms.coupled;
    alg = std::max(alg, std::abs(sim.omega(grid[i]) * tr.alpha_u[i] - rhs));
    alg_scale = std::max(alg_scale, std::abs(rhs));
  }
  r.dynamic_l2 = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  r.algebraic = alg_scale > 0.0 ? alg / alg_scale : alg;
  return r;
}

struct RealDrive {
  DrivePulse pulse;
  std::size_t sign_ambiguities = 0; ///< interior samples where alpha_u^2 nearly vanishes
};

/// Cross-check for real Lambda systems with Delta_e = Delta_u = theta_0 = 0:
/// alpha_u from probability conservation, kept on the positive branch.
inline RealDrive reconstruct_drive_real(const Wavepacket &wp, const SystemParams &p, const DriveContext &ctx,
                                        const std::vector<double> &grid, std::size_t refine = 4) {
  ctx.validate();
  detail::require_lambda(p, "real-amplitude reconstruction");
  if (ctx.delta_e != 0.0 || ctx.delta_u != 0.0 || ctx.theta0 != 0.0 || p.channel(0).detuning != 0.0)
    throw UnsupportedConfiguration("real-amplitude reconstruction needs zero detunings and theta_0");
  const double scale = 1.0 - ctx.chi, k = p.kappa(), gam = p.gamma(), g1 = p.channel(0).coupling;
  const auto dense = refine_grid(grid, refine);
  const double h = uniform_step(dense);
  RealDrive out;
  out.pulse.times = dense;
  out.pulse.chi = ctx.chi;
  double pk = 0.0, pg = 0.0, prev_a = 0.0, prev_e = 0.0;
  for (std::size_t i = 0; i < dense.size(); ++i) {
    const auto terms = detail::drive_terms(wp, p, ctx, scale, dense[i]);
    const double a = scale * wp.derivatives(0, dense[i])[0].real();
    const double e = terms.alpha_e.real();
    if (i > 0) {
      pk += h * k * (a * a + prev_a * prev_a);
      pg += h * gam * (e * e + prev_e * prev_e);
    }
    prev_a = a;
    prev_e = e;
    const double u2 = 1.0 - e * e - a * a - pk - pg;
    if (i == 0) {
      out.pulse.initial_excited_amplitude = e;
      out.pulse.initial_ground_amplitude = std::sqrt(std::max(u2, 0.0));
    }
    if (u2 < 1e-10 && i > 0 && i + 1 < dense.size()) ++out.sign_ambiguities;
    const double u = std::sqrt(std::max(u2, 1e-300));
    out.pulse.omega.push_back(-terms.X / (g1 * u));
  }
  return out;
}

/// Fourier wavepacket prepared for reconstruction.
struct PreparedWavepacket {
  CVector coefficients;
  double lowpass_l2_delta = 0.0; ///< ||filtered - original|| / ||original||
};

/// Optionally drops |n| > cutoff (negative keeps everything), returns to the
/// admissible subspace and rotates the global phase so alpha_g1 is real and
/// positive where its magnitude peaks.
inline PreparedWavepacket prepare_wavepacket(const CVector &coefficients, const FourierBasis &b,
                                             const SystemParams &p, const ProjectionData &proj, int cutoff) {
  PreparedWavepacket out;
  CVector c = coefficients;
  if (cutoff >= 0) {
    for (std::size_t i = 0; i < b.size(); ++i)
      if (std::abs(b.frequency_index(i)) > cutoff) c[static_cast<Eigen::Index>(i)] = 0.0;
    c = proj.lift(proj.project(c));
    const double n = coefficients.norm();
    out.lowpass_l2_delta = n > 0.0 ? (c - coefficients).norm() / n : 0.0;
  }
  const auto times = uniform_grid(0.0, b.window(), 1025);
  const auto s = synthesize_time_domain({b, c}, p, 0, times);
  cplx peak{};
  for (const auto &a : s.derivative[0])
    if (std::abs(a) > std::abs(peak)) peak = a;
  if (std::abs(peak) > 0.0) c *= std::conj(peak) / std::abs(peak);
  out.coefficients = std::move(c);
  return out;
}

} // namespace photonlim
