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
#include <complex>
#include <memory>
#include <vector>

// Boost 1.74's pchip header calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "errors.hpp"

namespace photonlim {

/// Monotone cubic (PCHIP) interpolation of complex samples, real and
/// imaginary parts separately. Queries outside the sample range clamp.
class ComplexPchip {
public:
  ComplexPchip(const std::vector<double> &t, const std::vector<std::complex<double>> &y)
      : lo_(t.empty() ? 0.0 : t.front()), hi_(t.empty() ? 0.0 : t.back()) {
    if (t.size() != y.size() || t.size() < 4)
      throw ConfigurationError("interpolation needs at least four matching samples");
    std::vector<double> re(y.size()), im(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      re[i] = y[i].real();
      im[i] = y[i].imag();
    }
    re_ = std::make_shared<Spline>(std::vector<double>(t), std::move(re));
    im_ = std::make_shared<Spline>(std::vector<double>(t), std::move(im));
  }

  std::complex<double> operator()(double t) const {
    t = std::clamp(t, lo_, hi_);
    return {(*re_)(t), (*im_)(t)};
  }

private:
  using Spline = boost::math::interpolators::pchip<std::vector<double>>;
  double lo_, hi_;
  std::shared_ptr<Spline> re_, im_;
};

} // namespace photonlim
