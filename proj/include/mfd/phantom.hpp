/*
 * Copyright 2026 The mfdespeckle Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <array>
#include <cmath>
#include <numbers>

#include "mfd/image.hpp"

namespace mfd {

struct PhantomSpec {
  std::size_t size = 256;
  /// Floor applied after scaling to [0,1]; keeps r^(eta-1) finite.
  double contrast_floor = 0.01;

  void validate() const {
    if (size < 8) throw InvalidArgument("PhantomSpec: size must be >= 8");
    if (!(contrast_floor > 0.0 && contrast_floor <= 0.1))
      throw InvalidArgument("PhantomSpec: contrast_floor must lie in (0, 0.1]");
  }
};

/// One ellipse of the analytic phantom: additive intensity, semi-axes,
/// centre and rotation in degrees.
struct Ellipse {
  double intensity, a, b, x0, y0, phi_deg;
};

/// Modified Shepp-Logan table (improved-contrast intensities).
inline constexpr std::array<Ellipse, 10> kModifiedSheppLogan{{
    {1.0, 0.69, 0.92, 0.0, 0.0, 0.0},
    {-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0},
    {-0.2, 0.11, 0.31, 0.22, 0.0, -18.0},
    {-0.2, 0.16, 0.41, -0.22, 0.0, 18.0},
    {0.1, 0.21, 0.25, 0.0, 0.35, 0.0},
    {0.1, 0.046, 0.046, 0.0, 0.1, 0.0},
    {0.1, 0.046, 0.046, 0.0, -0.1, 0.0},
    {0.1, 0.046, 0.023, -0.08, -0.605, 0.0},
    {0.1, 0.023, 0.023, 0.0, -0.606, 0.0},
    {0.1, 0.023, 0.046, 0.06, -0.605, 0.0},
}};

/// Unscaled phantom on the [-1,1]^2 grid; row 0 is y = +1.
inline Image shepp_logan_raw(std::size_t n) {
  if (n < 2) throw InvalidArgument("shepp_logan_raw: size must be >= 2");
  Image img(n, n, Domain::estimate);
  const double half = (static_cast<double>(n) - 1.0) / 2.0;
  for (const auto& e : kModifiedSheppLogan) {
    const double phi = e.phi_deg * std::numbers::pi / 180.0;
    const double c = std::cos(phi), s = std::sin(phi);
    const double a2 = e.a * e.a, b2 = e.b * e.b;
    for (std::size_t i = 0; i < n; ++i) {
      const double y = (half - static_cast<double>(i)) / half - e.y0;
      for (std::size_t j = 0; j < n; ++j) {
        const double x = (static_cast<double>(j) - half) / half - e.x0;
        const double u = x * c + y * s;
        const double v = y * c - x * s;
        if (u * u / a2 + v * v / b2 <= 1.0) img(i, j) += e.intensity;
      }
    }
  }
  return img;
}

/// Phantom min-max scaled to [0,1] and floored at spec.contrast_floor.
inline Image generate_phantom(const PhantomSpec& spec) {
  spec.validate();
  Image raw = shepp_logan_raw(spec.size);
  const double lo = min_value(raw), hi = max_value(raw);
  const double span = hi - lo;
  for (auto& v : raw.values()) {
    double t = span > 0.0 ? (v - lo) / span : 0.0;
    // Accumulated ellipse sums carry rounding noise around exact levels.
    t = std::round(t * 1e12) / 1e12;
    v = std::max(t, spec.contrast_floor);
  }
  return raw.with_domain(Domain::envelope);
}

}  // namespace mfd
