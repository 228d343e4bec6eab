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
#include <vector>

#include "errors.hpp"

namespace photonlim {

/// n equally spaced times from a to b inclusive.
inline std::vector<double> uniform_grid(double a, double b, std::size_t n) {
  if (n < 2) throw ConfigurationError("time grid needs at least two points");
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  t.back() = b;
  return t;
}

/// The grid with `factor - 1` extra points inside every interval.
inline std::vector<double> refine_grid(const std::vector<double> &grid, std::size_t factor) {
  if (grid.size() < 2 || factor < 1) throw ConfigurationError("cannot refine grid");
  std::vector<double> out;
  out.reserve((grid.size() - 1) * factor + 1);
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    for (std::size_t k = 0; k < factor; ++k)
      out.push_back(grid[i] + (grid[i + 1] - grid[i]) * static_cast<double>(k) / static_cast<double>(factor));
  out.push_back(grid.back());
  return out;
}

/// Throws unless the grid is strictly increasing with equal spacing to 1e-9 relative.
inline double uniform_step(const std::vector<double> &grid) {
  if (grid.size() < 2) throw ConfigurationError("time grid needs at least two points");
  const double h = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
  if (!(h > 0.0)) throw ConfigurationError("time grid must be increasing");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (std::abs(grid[i] - grid[i - 1] - h) > 1e-9 * h * static_cast<double>(grid.size()))
      throw ConfigurationError("time grid must be uniform");
  return h;
}

} // namespace photonlim
