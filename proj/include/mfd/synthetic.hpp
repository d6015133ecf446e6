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

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "mfd/image.hpp"
#include "mfd/specklesim.hpp"

namespace mfd {

/// Full linear convolution, length a + b - 1.
inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

/// Damped-cosine RF pulse: bandpass, DC suppressed, and asymmetric. A
/// symmetric even-length FIR always vanishes at Nyquist, which leaves the
/// blind cross-relation problem with a near-null direction.
inline std::vector<double> bandpass_psf(std::size_t taps = 8) {
  std::vector<double> s(taps);
  for (std::size_t i = 0; i < taps; ++i) {
    const double t = static_cast<double>(i);
    s[i] = std::exp(-t / 3.0) * std::cos(2.0 * std::numbers::pi * 0.2 * t + 1.0);
  }
  return s;
}

/// Skewed lowpass beam profile of four taps.
inline std::vector<double> lateral_psf() { return {0.6, 1.0, 0.5, 0.15}; }

struct BlurScene {
  /// Reflectivity of size (rows - La + 1) x (cols - Ll + 1).
  Image trf;
  /// trf blurred by sa along columns and sl along rows, size rows x cols.
  Image rf;
  std::vector<double> sa, sl;
};

/// Bernoulli-Gaussian reflectivity (nonzero with probability `density`)
/// under a separable blur. The full convolution keeps the model exact.
inline BlurScene separable_blur_scene(std::size_t rows, std::size_t cols, std::uint64_t seed, double density = 0.3,
                                      std::vector<double> sa = bandpass_psf(), std::vector<double> sl = lateral_psf()) {
  if (sa.empty() || sl.empty() || rows < sa.size() || cols < sl.size())
    throw InvalidArgument("separable_blur_scene: image smaller than the blur");
  if (!(density > 0.0 && density <= 1.0)) throw InvalidArgument("separable_blur_scene: density must lie in (0, 1]");
  NormalStream ns(seed);
  std::mt19937_64 pick(splitmix64(seed));
  Image trf(rows - sa.size() + 1, cols - sl.size() + 1, Domain::rf);
  for (auto& v : trf.values()) {
    const double z = ns.next();
    const bool on = static_cast<double>(pick() >> 11) * 0x1.0p-53 < density;
    v = on ? z : 0.0;
  }
  Image ax(rows, trf.cols(), Domain::rf);
  for (std::size_t c = 0; c < trf.cols(); ++c) ax.set_column(c, convolve(trf.column(c), sa));
  Image rf(rows, cols, Domain::rf);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = ax.row(r);
    const auto full = convolve(std::vector<double>(row.begin(), row.end()), sl);
    for (std::size_t c = 0; c < cols; ++c) rf(r, c) = full[c];
  }
  return {std::move(trf), std::move(rf), std::move(sa), std::move(sl)};
}

}  // namespace mfd
