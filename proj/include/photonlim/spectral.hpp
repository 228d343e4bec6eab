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
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "model.hpp"

namespace photonlim {

using cplx = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Frequency grid omega_n = 2 pi n / T_b, n in [-N, N]. Positions in every
/// coefficient vector run from 0 (n = -N) to 2N (n = +N).
class FourierBasis {
public:
  FourierBasis(double window, double period, int positive_count)
      : window_(window), period_(period), n_(positive_count) {
    if (!(window > 0.0)) throw ConfigurationError("extraction window must be positive");
    if (!(period > window))
      throw ConfigurationError("basis period T_b must exceed the extraction window T");
    if (positive_count < 1) throw ConfigurationError("basis needs N >= 1");
  }

  double window() const noexcept { return window_; }
  double period() const noexcept { return period_; }
  int positive_count() const noexcept { return n_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(2 * n_ + 1); }
  int frequency_index(std::size_t pos) const noexcept { return static_cast<int>(pos) - n_; }
  double omega_step() const noexcept { return 2.0 * std::numbers::pi / period_; }
  double omega(int n) const noexcept { return omega_step() * n; }
  double omega_at(std::size_t pos) const noexcept { return omega(frequency_index(pos)); }
  double omega_max() const noexcept { return omega(n_); }

private:
  double window_;
  double period_;
  int n_;
};

/// Basis for a window T; `channels` is j_M, which N must exceed.
inline FourierBasis build_basis(double T, double period, int N, std::size_t channels = 1) {
  if (N < static_cast<int>(channels))
    throw ConfigurationError("basis needs at least as many positive frequencies as channels");
  return FourierBasis(T, period, N);
}

/// omega_max must exceed the largest |Delta_gj|.
inline void check_basis_resolves(const FourierBasis &b, const SystemParams &p) {
  if (!(b.omega_max() > p.max_abs_detuning()))
    throw ConfigurationError("basis omega_max does not exceed the largest channel detuning");
}

/// Default sizing: T_b = factor * T, N = min(64, ceil(Delta_max T_b / 2pi) + 32),
/// at least 32, and never so small that omega_max <= Delta_max.
inline FourierBasis default_basis(const SystemParams &p, double T, double period_factor = 1.25) {
  const double tb = period_factor * T;
  const int needed = static_cast<int>(std::ceil(p.max_abs_detuning() * tb / (2.0 * std::numbers::pi)));
  int n = std::max(32, std::min(64, needed + 32));
  n = std::max(n, needed + 1);
  n = std::max(n, static_cast<int>(p.channel_count()));
  return FourierBasis(T, tb, n);
}

struct FourierVector {
  FourierBasis basis;
  CVector coefficients;
};

/// f_n^(1->j): channel-j coefficients in terms of reference-channel ones.
inline cplx conversion_factor(const FourierBasis &b, const SystemParams &p, std::size_t j, int n) {
  if (n < -b.positive_count() || n > b.positive_count())
    throw IndexError("frequency index out of range");
  const auto &c1 = p.channel(0);
  const auto &cj = p.channel(j);
  if (j == 0) return {1.0, 0.0};
  const double w = b.omega(n);
  return (cj.coupling / c1.coupling) * cplx(p.kappa(), w + c1.detuning) /
         cplx(p.kappa(), w + cj.detuning);
}

inline CVector conversion_factors(const FourierBasis &b, const SystemParams &p, std::size_t j) {
  CVector f(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) f[i] = conversion_factor(b, p, j, b.frequency_index(i));
  return f;
}

/// h_n = kappa + i(omega_n + Delta_g1); alpha_e = -(1/(g_1 sqrt(T_b))) sum h_n C_n e^{i w_n t}.
inline CVector excited_weights(const FourierBasis &b, const SystemParams &p) {
  CVector h(b.size());
  for (std::size_t i = 0; i < b.size(); ++i)
    h[i] = cplx(p.kappa(), b.omega_at(i) + p.channel(0).detuning);
  return h;
}

namespace detail {
/// (1/T_b) int_0^t exp(i dw t') dt'.
inline cplx kernel_entry(double dw, double t, double period) {
  if (dw == 0.0) return {t / period, 0.0};
  return 2.0 / (period * dw) * std::sin(0.5 * dw * t) * std::polar(1.0, 0.5 * dw * t);
}
} // namespace detail

/// V_{n',n}(t) = (1/T_b) int_0^t exp(i(w_n - w_n')t') dt'.
inline CMatrix kernel_matrix(const FourierBasis &b, double t) {
  const std::size_t n = b.size();
  std::vector<cplx> diag(2 * n - 1);
  for (std::size_t d = 0; d < 2 * n - 1; ++d) {
    const int shift = static_cast<int>(d) - static_cast<int>(n - 1);
    diag[d] = detail::kernel_entry(b.omega(shift), t, b.period());
  }
  CMatrix v(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) v(r, c) = diag[c + n - 1 - r];
  return v;
}

enum class ProbabilityKind { emission, cavity_occupation, spontaneous, excited, total_non_initial };

/// A probability P_zeta: the kind plus, for per-channel kinds, the channel.
struct Probability {
  ProbabilityKind kind = ProbabilityKind::emission;
  std::size_t channel = 0;

  static Probability emission(std::size_t j) { return {ProbabilityKind::emission, j}; }
  static Probability cavity_occupation(std::size_t j) { return {ProbabilityKind::cavity_occupation, j}; }
  static Probability spontaneous() { return {ProbabilityKind::spontaneous, 0}; }
  static Probability excited() { return {ProbabilityKind::excited, 0}; }
  static Probability total() { return {ProbabilityKind::total_non_initial, 0}; }

  bool per_channel() const noexcept {
    return kind == ProbabilityKind::emission || kind == ProbabilityKind::cavity_occupation;
  }

  /// "P_k1", "P_g2", "P_gamma", "P_e", "P_total" (channels are 1-based in names).
  std::string name() const {
    switch (kind) {
    case ProbabilityKind::emission: return "P_k" + std::to_string(channel + 1);
    case ProbabilityKind::cavity_occupation: return "P_g" + std::to_string(channel + 1);
    case ProbabilityKind::spontaneous: return "P_gamma";
    case ProbabilityKind::excited: return "P_e";
    case ProbabilityKind::total_non_initial: return "P_total";
    }
    throw UsageError("unknown probability kind");
  }

  static Probability parse(const std::string &s) {
    if (s == "P_gamma") return spontaneous();
    if (s == "P_e") return excited();
    if (s == "P_total") return total();
    if (s.size() > 3 && (s.rfind("P_k", 0) == 0 || s.rfind("P_g", 0) == 0)) {
      std::size_t used = 0;
      int j = 0;
      try {
        j = std::stoi(s.substr(3), &used);
      } catch (const std::exception &) {
        throw UsageError("unknown probability '" + s + "'");
      }
      if (used != s.size() - 3 || j < 1) throw UsageError("unknown probability '" + s + "'");
      return s[2] == 'k' ? emission(static_cast<std::size_t>(j - 1))
                         : cavity_occupation(static_cast<std::size_t>(j - 1));
    }
    throw UsageError("unknown probability '" + s + "'");
  }

  friend bool operator==(const Probability &, const Probability &) = default;
};

struct ProbabilityMatrix {
  Probability probability;
  double t = 0.0;
  CMatrix entries;
};

namespace detail {
/// Outer product conj(u) u^T, i.e. M_{n',n} = conj(u_n') u_n.
inline CMatrix point_matrix(const CVector &u) { return u.conjugate() * u.transpose(); }

inline CVector phases(const FourierBasis &b, double t) {
  CVector e(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) e[i] = std::polar(1.0, b.omega_at(i) * t);
  return e;
}
} // namespace detail

/// Dense matrix whose expectation with the reference-channel Fourier vector
/// gives the probability at time t.
inline ProbabilityMatrix probability_matrix(const FourierBasis &b, const SystemParams &p,
                                            Probability which, double t) {
  if (t < 0.0 || t > b.period() * (1.0 + 1e-12))
    throw DomainError("probability matrix time outside [0, T_b]");
  const double tb = b.period();
  const double g1 = p.channel(0).coupling;
  ProbabilityMatrix out{which, t, {}};
  switch (which.kind) {
  case ProbabilityKind::emission: {
    const CVector f = conversion_factors(b, p, which.channel);
    out.entries = 2.0 * p.kappa() * f.conjugate().asDiagonal() * kernel_matrix(b, t) * f.asDiagonal();
    break;
  }
  case ProbabilityKind::cavity_occupation: {
    const CVector u = conversion_factors(b, p, which.channel).cwiseProduct(detail::phases(b, t)) /
                      std::sqrt(tb);
    out.entries = detail::point_matrix(u);
    break;
  }
  case ProbabilityKind::spontaneous: {
    const CVector h = excited_weights(b, p);
    out.entries = (2.0 * p.gamma() / (g1 * g1)) * h.conjugate().asDiagonal() * kernel_matrix(b, t) *
                  h.asDiagonal();
    break;
  }
  case ProbabilityKind::excited: {
    const CVector x = excited_weights(b, p).cwiseProduct(detail::phases(b, t)) / (g1 * std::sqrt(tb));
    out.entries = detail::point_matrix(x);
    break;
  }
  case ProbabilityKind::total_non_initial: {
    CMatrix m = probability_matrix(b, p, Probability::spontaneous(), t).entries +
                probability_matrix(b, p, Probability::excited(), t).entries;
    for (std::size_t j = 0; j < p.channel_count(); ++j) {
      m += probability_matrix(b, p, Probability::emission(j), t).entries;
      m += probability_matrix(b, p, Probability::cavity_occupation(j), t).entries;
    }
    out.entries = std::move(m);
    break;
  }
  default:
    throw UsageError("unknown probability kind");
  }
  return out;
}

/// Time-domain samples of channel j and its first `max_order` derivatives.
struct WavepacketSamples {
  std::vector<double> times;
  std::vector<std::vector<cplx>> derivative; ///< derivative[k][i] = d^k alpha / dt^k at times[i]
};

/// alpha_gj(t) = (1/sqrt(T_b)) sum_n f_n^(1->j) C_n e^{i w_n t}; derivatives
/// multiply each term by (i w_n)^k.
inline WavepacketSamples synthesize_time_domain(const FourierVector &v, const SystemParams &p,
                                                std::size_t j, std::span<const double> times,
                                                int max_order = 0) {
  const auto &b = v.basis;
  if (static_cast<std::size_t>(v.coefficients.size()) != b.size())
    throw UsageError("Fourier vector length does not match its basis");
  const CVector a = conversion_factors(b, p, j).cwiseProduct(v.coefficients) / std::sqrt(b.period());
  WavepacketSamples out;
  out.times.assign(times.begin(), times.end());
  out.derivative.assign(static_cast<std::size_t>(max_order) + 1, std::vector<cplx>(times.size()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t pos = 0; pos < b.size(); ++pos) {
      const double w = b.omega_at(pos);
      cplx term = a[pos] * std::polar(1.0, w * times[i]);
      for (int k = 0; k <= max_order; ++k) {
        out.derivative[k][i] += term;
        term *= cplx(0.0, w);
      }
    }
  }
  return out;
}

/// Structured evaluation of every probability over a fixed time grid.
///
/// Integral probabilities are computed from the autocorrelation of the
/// weighted coefficients, R_d = sum_n conj(a_{n-d}) a_n, so a full profile
/// costs O(n^2 + K n) instead of K dense quadratic forms.
class ProbabilityProfile {
public:
  ProbabilityProfile(const FourierBasis &basis, const SystemParams &params, std::vector<double> times)
      : basis_(basis), params_(params), times_(std::move(times)) {
    const std::size_t n = basis_.size();
    const std::size_t span = 2 * n - 1; // differences 0 .. 2*(2N)
    phase_.resize(times_.size() * span);
    kernel_.resize(times_.size() * span);
    for (std::size_t k = 0; k < times_.size(); ++k) {
      for (std::size_t d = 0; d < span; ++d) {
        const double w = basis_.omega(static_cast<int>(d));
        phase_[k * span + d] = std::polar(1.0, w * times_[k]);
        kernel_[k * span + d] = detail::kernel_entry(w, times_[k], basis_.period());
      }
    }
    inv_iwtb_.assign(span, 0.0);
    for (std::size_t d = 1; d < span; ++d)
      inv_iwtb_[d] = 1.0 / cplx(0.0, basis_.omega(static_cast<int>(d)) * basis_.period());
    for (std::size_t j = 0; j < params_.channel_count(); ++j)
      factors_.push_back(conversion_factors(basis_, params_, j));
    excited_ = excited_weights(basis_, params_);
  }

  const std::vector<double> &times() const noexcept { return times_; }
  const FourierBasis &basis() const noexcept { return basis_; }

  /// Expectation of `which` at every grid time for Fourier vector c.
  std::vector<double> evaluate(const CVector &c, Probability which) const {
    std::vector<double> out(times_.size(), 0.0);
    const double g1 = params_.channel(0).coupling;
    switch (which.kind) {
    case ProbabilityKind::emission:
      accumulate_integral(c.cwiseProduct(factors_.at(which.channel)), 2.0 * params_.kappa(), out);
      break;
    case ProbabilityKind::cavity_occupation:
      accumulate_point(c.cwiseProduct(factors_.at(which.channel)), 1.0, out);
      break;
    case ProbabilityKind::spontaneous:
      accumulate_integral(c.cwiseProduct(excited_), 2.0 * params_.gamma() / (g1 * g1), out);
      break;
    case ProbabilityKind::excited:
      accumulate_point(c.cwiseProduct(excited_), 1.0 / (g1 * g1), out);
      break;
    case ProbabilityKind::total_non_initial:
      return total(c);
    }
    return out;
  }

  std::vector<double> total(const CVector &c) const {
    const double g1 = params_.channel(0).coupling;
    std::vector<cplx> r(2 * basis_.size() - 1, 0.0);
    for (const auto &f : factors_) add_autocorrelation(c.cwiseProduct(f), 2.0 * params_.kappa(), r);
    add_autocorrelation(c.cwiseProduct(excited_), 2.0 * params_.gamma() / (g1 * g1), r);
    std::vector<double> out(times_.size(), 0.0);
    integral_from_autocorrelation(r, out);
    for (const auto &f : factors_) accumulate_point(c.cwiseProduct(f), 1.0, out);
    accumulate_point(c.cwiseProduct(excited_), 1.0 / (g1 * g1), out);
    return out;
  }

  /// P(t_k) c computed from the structured form, without building the matrix.
  CVector apply(const CVector &c, Probability which, std::size_t k) const {
    if (k >= times_.size()) throw IndexError("profile time index out of range");
    const std::size_t span = 2 * basis_.size() - 1;
    return apply_with(c, which, &kernel_[k * span], &phase_[k * span]);
  }

  /// P(t) c at an arbitrary time in [0, T_b].
  CVector apply_at(const CVector &c, Probability which, double t) const {
    std::vector<cplx> kern, ph;
    tables_at(t, kern, ph);
    return apply_with(c, which, kern.data(), ph.data());
  }

  /// Total non-initial probability of c at arbitrary times, sharing one
  /// autocorrelation pass.
  class TotalCurve {
  public:
    TotalCurve(const ProbabilityProfile &prof, const CVector &c) : prof_(&prof) {
      const double g1 = prof.params_.channel(0).coupling;
      r_.assign(2 * prof.basis_.size() - 1, 0.0);
      for (const auto &f : prof.factors_) {
        weighted_.push_back(c.cwiseProduct(f));
        scales_.push_back(1.0);
        prof.add_autocorrelation(weighted_.back(), 2.0 * prof.params_.kappa(), r_);
      }
      weighted_.push_back(c.cwiseProduct(prof.excited_));
      scales_.push_back(1.0 / (g1 * g1));
      prof.add_autocorrelation(weighted_.back(), 2.0 * prof.params_.gamma() / (g1 * g1), r_);
    }

    double operator()(double t) const {
      std::vector<cplx> kern, ph;
      prof_->tables_at(t, kern, ph);
      double acc = r_[0].real() * kern[0].real();
      const std::size_t n = prof_->basis_.size();
      for (std::size_t d = 1; d < n; ++d) acc += 2.0 * (r_[d] * kern[d]).real();
      for (std::size_t i = 0; i < weighted_.size(); ++i)
        acc += scales_[i] * prof_->point_value(weighted_[i], ph.data());
      return acc;
    }

  private:
    const ProbabilityProfile *prof_;
    std::vector<cplx> r_;
    std::vector<CVector> weighted_;
    std::vector<double> scales_;
  };

private:
  void tables_at(double t, std::vector<cplx> &kern, std::vector<cplx> &ph) const {
    const std::size_t span = 2 * basis_.size() - 1;
    kern.resize(span);
    ph.resize(span);
    // Powers of one phase; re-anchored every 64 steps to bound rounding drift.
    const cplx step = std::polar(1.0, basis_.omega_step() * t);
    ph[0] = 1.0;
    kern[0] = {t / basis_.period(), 0.0};
    for (std::size_t d = 1; d < span; ++d) {
      const double w = basis_.omega(static_cast<int>(d));
      ph[d] = d % 64 == 0 ? std::polar(1.0, w * t) : ph[d - 1] * step;
      kern[d] = std::abs(w * t) < 1e-3 ? detail::kernel_entry(w, t, basis_.period())
                                      : (ph[d] - 1.0) * inv_iwtb_[d];
    }
  }

  CVector apply_with(const CVector &c, Probability which, const cplx *kern, const cplx *ph) const {
    const double g1 = params_.channel(0).coupling;
    CVector out = CVector::Zero(c.size());
    switch (which.kind) {
    case ProbabilityKind::emission:
      add_integral_apply(c, factors_.at(which.channel), 2.0 * params_.kappa(), kern, out);
      break;
    case ProbabilityKind::cavity_occupation:
      add_point_apply(c, factors_.at(which.channel), 1.0, ph, out);
      break;
    case ProbabilityKind::spontaneous:
      add_integral_apply(c, excited_, 2.0 * params_.gamma() / (g1 * g1), kern, out);
      break;
    case ProbabilityKind::excited:
      add_point_apply(c, excited_, 1.0 / (g1 * g1), ph, out);
      break;
    case ProbabilityKind::total_non_initial:
      for (const auto &f : factors_) {
        add_integral_apply(c, f, 2.0 * params_.kappa(), kern, out);
        add_point_apply(c, f, 1.0, ph, out);
      }
      add_integral_apply(c, excited_, 2.0 * params_.gamma() / (g1 * g1), kern, out);
      add_point_apply(c, excited_, 1.0 / (g1 * g1), ph, out);
      break;
    }
    return out;
  }

  /// out += scale * conj(w) .* V (w .* c), with V Toeplitz.
  void add_integral_apply(const CVector &c, const CVector &w, double scale, const cplx *kern,
                          CVector &out) const {
    const std::size_t n = basis_.size();
    const CVector x = w.cwiseProduct(c);
    for (std::size_t r = 0; r < n; ++r) {
      cplx s = 0.0;
      for (std::size_t q = 0; q < r; ++q) s += std::conj(kern[r - q]) * x[q];
      for (std::size_t q = r; q < n; ++q) s += kern[q - r] * x[q];
      out[r] += scale * std::conj(w[r]) * s;
    }
  }

  /// out += scale * conj(u) (u^T c) / T_b with u = w .* exp(i w_n t).
  void add_point_apply(const CVector &c, const CVector &w, double scale, const cplx *ph,
                       CVector &out) const {
    const int nn = basis_.positive_count();
    CVector u(c.size());
    u[nn] = w[nn];
    for (int m = 1; m <= nn; ++m) {
      u[nn + m] = w[nn + m] * ph[m];
      u[nn - m] = w[nn - m] * std::conj(ph[m]);
    }
    const cplx s = u.transpose() * c;
    out += (scale / basis_.period()) * s * u.conjugate();
  }

  /// |sum_n a_n e^{i w_n t}|^2 / T_b.
  double point_value(const CVector &a, const cplx *ph) const {
    const int nn = basis_.positive_count();
    cplx s = a[nn];
    for (int m = 1; m <= nn; ++m) s += a[nn + m] * ph[m] + a[nn - m] * std::conj(ph[m]);
    return std::norm(s) / basis_.period();
  }

  void add_autocorrelation(const CVector &a, double scale, std::vector<cplx> &r) const {
    const std::size_t n = static_cast<std::size_t>(a.size());
    for (std::size_t d = 0; d < n; ++d) {
      cplx s = 0.0;
      for (std::size_t q = d; q < n; ++q) s += std::conj(a[q - d]) * a[q];
      r[d] += scale * s;
    }
  }

  void integral_from_autocorrelation(const std::vector<cplx> &r, std::vector<double> &out) const {
    const std::size_t span = 2 * basis_.size() - 1;
    const std::size_t n = basis_.size();
    for (std::size_t k = 0; k < times_.size(); ++k) {
      const cplx *kern = &kernel_[k * span];
      double acc = r[0].real() * kern[0].real();
      for (std::size_t d = 1; d < n; ++d) acc += 2.0 * (r[d] * kern[d]).real();
      out[k] += acc;
    }
  }

  void accumulate_integral(const CVector &a, double scale, std::vector<double> &out) const {
    std::vector<cplx> r(2 * basis_.size() - 1, 0.0);
    add_autocorrelation(a, scale, r);
    integral_from_autocorrelation(r, out);
  }

  /// out[k] += scale * |sum_n a_n e^{i w_n t_k}|^2 / T_b.
  void accumulate_point(const CVector &a, double scale, std::vector<double> &out) const {
    const std::size_t span = 2 * basis_.size() - 1;
    const int nn = basis_.positive_count();
    const double norm = scale / basis_.period();
    for (std::size_t k = 0; k < times_.size(); ++k) {
      const cplx *ph = &phase_[k * span];
      cplx s = a[nn];
      for (int m = 1; m <= nn; ++m) s += a[nn + m] * ph[m] + a[nn - m] * std::conj(ph[m]);
      out[k] += norm * std::norm(s);
    }
  }

  FourierBasis basis_;
  SystemParams params_;
  std::vector<double> times_;
  std::vector<cplx> phase_;  // exp(i w_d t_k)
  std::vector<cplx> kernel_; // V entry for difference d at t_k
  std::vector<cplx> inv_iwtb_;
  std::vector<CVector> factors_;
  CVector excited_;
};

/// Thread-safe cache of dense probability matrices keyed by (kind, channel, time index).
class MatrixCache {
public:
  MatrixCache(FourierBasis basis, SystemParams params, std::vector<double> times)
      : basis_(std::move(basis)), params_(std::move(params)), times_(std::move(times)) {}

  std::shared_ptr<const CMatrix> get(Probability which, std::size_t time_index) {
    if (time_index >= times_.size()) throw IndexError("cache time index out of range");
    const Key key{static_cast<int>(which.kind), which.channel, time_index};
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    auto m = std::make_shared<const CMatrix>(
        probability_matrix(basis_, params_, which, times_[time_index]).entries);
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(m)).first->second;
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return cache_.size();
  }

  const std::vector<double> &times() const noexcept { return times_; }

private:
  using Key = std::tuple<int, std::size_t, std::size_t>;
  FourierBasis basis_;
  SystemParams params_;
  std::vector<double> times_;
  mutable std::mutex mutex_;
  std::map<Key, std::shared_ptr<const CMatrix>> cache_;
};

} // namespace photonlim
