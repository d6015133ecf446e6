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

#include <algorithm>
#include <cmath>
#include <vector>

#include "mfd/image.hpp"

namespace mfd {

/// Spatial denoiser slot applied to the averaged estimate.
struct DenoiserConfig {
  enum class Kind { none, hard_threshold };
  Kind kind = Kind::none;
  /// Threshold in units of the robust noise scale median(|HH|) / 0.6745.
  double level = 3.0;

  void validate() const {
    if (kind == Kind::hard_threshold && !(level >= 0.0))
      throw InvalidArgument("DenoiserConfig: level must be >= 0");
  }
};

namespace detail {
inline double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double hi = *mid;
  const double lo = *std::max_element(v.begin(), mid);
  return 0.5 * (lo + hi);
}
}  // namespace detail

/// Single-level orthonormal 2-D Haar transform with hard thresholding of
/// the three detail bands. A trailing odd row or column passes through.
inline Image haar_hard_threshold(const Image& img, double level) {
  const std::size_t M2 = img.rows() / 2, N2 = img.cols() / 2;
  if (M2 == 0 || N2 == 0) return img;
  std::vector<double> ll(M2 * N2), lh(M2 * N2), hl(M2 * N2), hh(M2 * N2);
  for (std::size_t i = 0; i < M2; ++i)
    for (std::size_t j = 0; j < N2; ++j) {
      const double a = img(2 * i, 2 * j), b = img(2 * i, 2 * j + 1);
      const double c = img(2 * i + 1, 2 * j), d = img(2 * i + 1, 2 * j + 1);
      const std::size_t k = i * N2 + j;
      ll[k] = 0.5 * (a + b + c + d);
      lh[k] = 0.5 * (a - b + c - d);
      hl[k] = 0.5 * (a + b - c - d);
      hh[k] = 0.5 * (a - b - c + d);
    }
  std::vector<double> mag(hh.size());
  std::transform(hh.begin(), hh.end(), mag.begin(), [](double v) { return std::abs(v); });
  const double thr = level * detail::median_of(std::move(mag)) / 0.6745;
  for (auto* band : {&lh, &hl, &hh})
    for (auto& v : *band)
      if (std::abs(v) < thr) v = 0.0;
  Image out = img;
  for (std::size_t i = 0; i < M2; ++i)
    for (std::size_t j = 0; j < N2; ++j) {
      const std::size_t k = i * N2 + j;
      out(2 * i, 2 * j) = 0.5 * (ll[k] + lh[k] + hl[k] + hh[k]);
      out(2 * i, 2 * j + 1) = 0.5 * (ll[k] - lh[k] + hl[k] - hh[k]);
      out(2 * i + 1, 2 * j) = 0.5 * (ll[k] + lh[k] - hl[k] - hh[k]);
      out(2 * i + 1, 2 * j + 1) = 0.5 * (ll[k] - lh[k] - hl[k] + hh[k]);
    }
  return out;
}

inline Image apply_denoiser(const Image& img, const DenoiserConfig& cfg) {
  cfg.validate();
  switch (cfg.kind) {
    case DenoiserConfig::Kind::none: return img;
    case DenoiserConfig::Kind::hard_threshold: return haar_hard_threshold(img, cfg.level);
  }
  return img;
}

}  // namespace mfd
