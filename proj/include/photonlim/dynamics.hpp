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
#include <complex>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>

#include "errors.hpp"
#include "grid.hpp"
#include "model.hpp"

namespace photonlim {

using cplx = std::complex<double>;
using DriveFunction = std::function<cplx(double)>;

/// Drive and the free parameters of the initial state.
struct DriveContext {
  DriveFunction omega = [](double) { return cplx{}; };
  double delta_u = 0.0;
  double delta_e = 0.0;
  double theta0 = 0.0; ///< phase of alpha_u(0)
  double chi = 0.02;   ///< amplitude margin used by drive reconstruction

  void validate() const {
    if (!(chi > 0.0 && chi < 1.0)) throw ConfigurationError("chi must lie in (0, 1)");
    if (!(theta0 >= 0.0 && theta0 < 2.0 * std::numbers::pi))
      throw ConfigurationError("theta_0 must lie in [0, 2 pi)");
    if (!omega) throw ConfigurationError("drive function is empty");
  }
};

struct InitialState {
  cplx u{1.0, 0.0};
  cplx e{0.0, 0.0};
  std::vector<cplx> g; ///< empty means every cavity state starts empty
};

struct Trajectory {
  std::vector<double> times;
  std::vector<cplx> alpha_u, alpha_e;
  std::vector<std::vector<cplx>> alpha_g;   ///< [channel][sample]
  std::vector<std::vector<double>> p_kappa; ///< [channel][sample]
  std::vector<double> p_gamma;
  double max_conservation_error = 0.0;

  /// |u|^2 + |e|^2 + sum |g_j|^2 + sum P_kj + P_gamma at sample i.
  double total(std::size_t i) const {
    double s = std::norm(alpha_u[i]) + std::norm(alpha_e[i]) + p_gamma[i];
    for (std::size_t j = 0; j < alpha_g.size(); ++j) s += std::norm(alpha_g[j][i]) + p_kappa[j][i];
    return s;
  }
  double emitted(std::size_t i) const {
    double s = 0.0;
    for (const auto &pk : p_kappa) s += pk[i];
    return s;
  }
};

struct IntegrationOptions {
  std::size_t substeps = 1;       ///< RK4 steps per grid interval
  double drift_tolerance = 1e-6;  ///< conservation drift that raises AccuracyError
};

/// Fixed-step classical RK4 for
///   u'   = -i Delta_u u - conj(Omega) e
///   e'   = -(gamma + i Delta_e) e + Omega u + sum_j g_j a_j
///   a_j' = -(kappa + i Delta_gj) a_j - g_j e
/// with P_kj' = 2 kappa |a_j|^2 and P_gamma' = 2 gamma |e|^2 carried alongside.
inline Trajectory integrate(const SystemParams &p, const DriveContext &ctx, const InitialState &init,
                            const std::vector<double> &grid, const IntegrationOptions &opt = {}) {
  if (!ctx.omega) throw ConfigurationError("drive function is empty");
  const double h = uniform_step(grid) / static_cast<double>(std::max<std::size_t>(opt.substeps, 1));
  const std::size_t J = p.channel_count();
  if (!init.g.empty() && init.g.size() != J) throw ConfigurationError("initial cavity amplitudes per channel");
  double start = std::norm(init.u) + std::norm(init.e);
  for (const auto &a : init.g) start += std::norm(a);
  if (start > 1.0 + 1e-12) throw ConfigurationError("initial state has norm above one");

  using State = std::vector<cplx>;
  // Layout: u, e, a_1..a_J, P_k1..P_kJ (real parts), P_gamma (real part).
  State x(2 * J + 3, cplx{});
  x[0] = init.u;
  x[1] = init.e;
  for (std::size_t j = 0; j < J && !init.g.empty(); ++j) x[2 + j] = init.g[j];

  const double k = p.kappa(), gam = p.gamma();
  const cplx I(0.0, 1.0);
  auto rhs = [&](const State &s, State &d, double t) {
    const cplx om = ctx.omega(t);
    d[0] = -I * ctx.delta_u * s[0] - std::conj(om) * s[1];
    cplx de = -(gam + I * ctx.delta_e) * s[1] + om * s[0];
    for (std::size_t j = 0; j < J; ++j) {
      const auto &c = p.channel(j);
      de += c.coupling * s[2 + j];
      d[2 + j] = -(k + I * c.detuning) * s[2 + j] - c.coupling * s[1];
      d[2 + J + j] = 2.0 * k * std::norm(s[2 + j]);
    }
    d[1] = de;
    d[2 + 2 * J] = 2.0 * gam * std::norm(s[1]);
  };

  Trajectory tr;
  tr.times = grid;
  tr.alpha_g.assign(J, {});
  tr.p_kappa.assign(J, {});
  auto record = [&](const State &s) {
    tr.alpha_u.push_back(s[0]);
    tr.alpha_e.push_back(s[1]);
    for (std::size_t j = 0; j < J; ++j) {
      tr.alpha_g[j].push_back(s[2 + j]);
      tr.p_kappa[j].push_back(s[2 + J + j].real());
    }
    tr.p_gamma.push_back(s[2 + 2 * J].real());
    const double err = std::abs(tr.total(tr.alpha_u.size() - 1) - start);
    tr.max_conservation_error = std::max(tr.max_conservation_error, err);
  };

  boost::numeric::odeint::runge_kutta4<State> stepper;
  record(x);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    double t = grid[i];
    for (std::size_t s = 0; s < std::max<std::size_t>(opt.substeps, 1); ++s, t += h)
      stepper.do_step(rhs, x, t, h);
    record(x);
  }
  if (tr.max_conservation_error > opt.drift_tolerance)
    throw AccuracyError("conservation drift " + std::to_string(tr.max_conservation_error) +
                        " exceeds tolerance; use a finer time grid");
  return tr;
}

/// Everything starts in |e,0> and evolves without drive.
inline Trajectory instant_excitation(const SystemParams &p, const std::vector<double> &grid,
                                     const IntegrationOptions &opt = {}) {
  DriveContext ctx;
  InitialState init;
  init.u = 0.0;
  init.e = 1.0;
  return integrate(p, ctx, init, grid, opt);
}

} // namespace photonlim
