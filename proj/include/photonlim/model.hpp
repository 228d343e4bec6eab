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
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"

namespace photonlim {

/// One occupied-cavity state |g_j, 1_j> coupled to the excited state.
struct CavityChannel {
  double coupling = 0.0;  ///< g_j, sign allowed
  double detuning = 0.0;  ///< Delta_gj relative to the reference level
  std::string polarization; ///< reporting tag only
};

/// Cavity/emitter rates and the ordered list of cavity channels.
///
/// Channel 0 is the reference channel for every Fourier conversion. All rates
/// share one angular-frequency unit; times are in its inverse.
class SystemParams {
public:
  SystemParams(double kappa, double gamma, std::vector<CavityChannel> channels)
      : kappa_(kappa), gamma_(gamma), channels_(std::move(channels)) {
    if (!(kappa_ > 0.0) || !std::isfinite(kappa_))
      throw ConfigurationError("kappa must be positive and finite");
    if (!(gamma_ > 0.0) || !std::isfinite(gamma_))
      throw ConfigurationError("gamma must be positive and finite");
    if (channels_.empty())
      throw ConfigurationError("at least one cavity channel is required");
    for (const auto &c : channels_) {
      if (c.coupling == 0.0 || !std::isfinite(c.coupling))
        throw ConfigurationError("channel coupling must be finite and nonzero");
      if (!std::isfinite(c.detuning))
        throw ConfigurationError("channel detuning must be finite");
    }
  }

  /// Lambda system with a single resonant channel.
  static SystemParams lambda(double kappa, double gamma, double g) {
    return SystemParams(kappa, gamma, {CavityChannel{g, 0.0, "g"}});
  }

  double kappa() const noexcept { return kappa_; }
  double gamma() const noexcept { return gamma_; }
  std::size_t channel_count() const noexcept { return channels_.size(); }
  bool is_lambda() const noexcept { return channels_.size() == 1; }
  const std::vector<CavityChannel> &channels() const noexcept { return channels_; }

  const CavityChannel &channel(std::size_t j) const {
    if (j >= channels_.size())
      throw IndexError("channel index " + std::to_string(j) + " out of range (" +
                       std::to_string(channels_.size()) + " channels)");
    return channels_[j];
  }

  double max_abs_detuning() const noexcept {
    double m = 0.0;
    for (const auto &c : channels_) m = std::max(m, std::abs(c.detuning));
    return m;
  }

private:
  double kappa_;
  double gamma_;
  std::vector<CavityChannel> channels_;
};

struct DerivedQuantities {
  double cooperativity = 0.0;              ///< C (from g_eff when several channels)
  std::vector<double> channel_cooperativity; ///< C_j per channel
  double critical_time = 0.0;
  double adiabatic_limit = 0.0;
  double instant_limit = 0.0;
  double effective_coupling = 0.0;         ///< sqrt(sum g_j^2)
};

inline double cooperativity(const SystemParams &p, std::size_t j) {
  const double g = p.channel(j).coupling;
  return g * g / (2.0 * p.kappa() * p.gamma());
}

inline double effective_coupling(const SystemParams &p) {
  double s = 0.0;
  for (const auto &c : p.channels()) s += c.coupling * c.coupling;
  return std::sqrt(s);
}

namespace detail {
inline void require_lambda(const SystemParams &p, const char *what) {
  if (!p.is_lambda())
    throw UnsupportedConfiguration(std::string(what) +
                                   " is defined for single-channel systems only");
}
} // namespace detail

/// max(kappa/g^2, 1/kappa).
inline double critical_time(const SystemParams &p) {
  detail::require_lambda(p, "critical_time");
  const double g = p.channel(0).coupling;
  return std::max(p.kappa() / (g * g), 1.0 / p.kappa());
}

/// Infinite-time extraction limit 2C/(2C+1).
inline double adiabatic_limit(const SystemParams &p) {
  detail::require_lambda(p, "adiabatic_limit");
  const double c2 = 2.0 * cooperativity(p, 0);
  return c2 / (c2 + 1.0);
}

/// Extraction after an instantaneous transfer to |e,0>.
inline double instant_excitation_limit(const SystemParams &p) {
  detail::require_lambda(p, "instant_excitation_limit");
  return p.kappa() / (p.kappa() + p.gamma()) * adiabatic_limit(p);
}

/// The Lambda system obtained when all channels are degenerate.
inline SystemParams effective_lambda(const SystemParams &p) {
  return SystemParams::lambda(p.kappa(), p.gamma(), effective_coupling(p));
}

inline DerivedQuantities derive(const SystemParams &p) {
  const SystemParams eff = p.is_lambda() ? p : effective_lambda(p);
  DerivedQuantities d;
  d.cooperativity = cooperativity(eff, 0);
  for (std::size_t j = 0; j < p.channel_count(); ++j)
    d.channel_cooperativity.push_back(cooperativity(p, j));
  d.critical_time = critical_time(eff);
  d.adiabatic_limit = adiabatic_limit(eff);
  d.instant_limit = instant_excitation_limit(eff);
  d.effective_coupling = effective_coupling(p);
  return d;
}

/// Infinite-time P_k1 * P_k2 for two degenerate channels.
inline double product_limit_degenerate(const SystemParams &p) {
  if (p.channel_count() != 2)
    throw UnsupportedConfiguration("product limits need exactly two channels");
  const double g1s = std::pow(p.channel(0).coupling, 2);
  const double g2s = std::pow(p.channel(1).coupling, 2);
  const double ges = g1s + g2s;
  const double r = ges / (ges + p.kappa() * p.gamma());
  return g1s * g2s / (ges * ges) * r * r;
}

/// Infinite-time P_k1 * P_k2 for two spectrally separated channels.
inline double product_limit_decoupled(const SystemParams &p) {
  if (p.channel_count() != 2)
    throw UnsupportedConfiguration("product limits need exactly two channels");
  const double c1 = 2.0 * cooperativity(p, 0);
  const double c2 = 2.0 * cooperativity(p, 1);
  return c1 * c2 / (4.0 * (c1 + 1.0) * (c2 + 1.0));
}

/// Shift every detuning so the g_j^2-weighted mean is zero.
inline SystemParams centered_detunings(const SystemParams &p) {
  double w = 0.0, s = 0.0;
  for (const auto &c : p.channels()) {
    w += c.coupling * c.coupling;
    s += c.coupling * c.coupling * c.detuning;
  }
  auto ch = p.channels();
  for (auto &c : ch) c.detuning -= s / w;
  return SystemParams(p.kappa(), p.gamma(), std::move(ch));
}

} // namespace photonlim
