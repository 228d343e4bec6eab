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
#include <cstddef>
#include <optional>
#include <utility>

namespace photonlim::roots {

struct Bracket {
  double lo;
  double hi;
};

/// First sign change of f on the open interval (a, b), scanning `samples`
/// interior points. Endpoints are never evaluated.
template <class F>
std::optional<Bracket> first_sign_change(F &&f, double a, double b, std::size_t samples) {
  const double h = (b - a) / static_cast<double>(samples + 1);
  double x_prev = a + h;
  double f_prev = f(x_prev);
  for (std::size_t i = 2; i <= samples; ++i) {
    const double x = a + h * static_cast<double>(i);
    const double fx = f(x);
    if (f_prev == 0.0) return Bracket{x_prev, x_prev};
    if ((f_prev < 0.0) != (fx < 0.0)) return Bracket{x_prev, x};
    x_prev = x;
    f_prev = fx;
  }
  return std::nullopt;
}

/// Bisection until the bracket is narrower than rel_width * |midpoint|.
template <class F>
double bisect(F &&f, Bracket br, double rel_width = 1e-14, std::size_t max_iter = 400) {
  double lo = br.lo, hi = br.hi;
  double flo = f(lo);
  if (flo == 0.0) return lo;
  for (std::size_t i = 0; i < max_iter; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (hi - lo <= rel_width * std::abs(mid) || mid == lo || mid == hi) break;
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Golden-section search for a maximum of a unimodal f on [a, b].
template <class F>
std::pair<double, double> golden_maximum(F &&f, double a, double b, double tol = 1e-13,
                                         std::size_t max_iter = 200) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (std::size_t i = 0; i < max_iter && (b - a) > tol * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    }
  }
  return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

} // namespace photonlim::roots
