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

#include "mfd/image.hpp"

namespace mfd {

struct DisplayParams {
  double gamma = 0.97;
  double w_low = 1e-2;
  double w_high = 0.98;
  double dynamic_range_db = 35.0;

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) throw InvalidArgument("DisplayParams: gamma must be > 0");
    if (!(w_low >= 0.0 && w_low < w_high && w_high < 1.0))
      throw InvalidArgument("DisplayParams: require 0 <= w_low < w_high < 1");
    if (!(dynamic_range_db > 0.0)) throw InvalidArgument("DisplayParams: dynamic range must be > 0");
  }
};

namespace detail {
inline double positive_max(const Image& img, const char* who) {
  for (double v : img.values())
    if (v < 0.0) throw InvalidArgument(std::string(who) + ": negative pixel");
  const double mx = max_value(img);
  if (!(mx > 0.0)) throw InvalidArgument(std::string(who) + ": all-zero image");
  return mx;
}
}  // namespace detail

/// (r / max r)^gamma.
inline Image gamma_correct(const Image& img, double gamma) {
  if (!(gamma > 0.0)) throw InvalidArgument("gamma_correct: gamma must be > 0");
  const double mx = detail::positive_max(img, "gamma_correct");
  return map(img, [=](double v) { return std::pow(v / mx, gamma); }, Domain::envelope);
}

/// 0 below w_low, (I / max I - w_low) / (w_high - w_low) in between, 1
/// above w_high. The ramp is clamped to [0,1]; the division by max I is
/// kept even though the input is already normalized.
inline Image gray_transform(const Image& img, double w_low, double w_high) {
  if (!(w_low < w_high)) throw InvalidArgument("gray_transform: W_low must be < W_high");
  const double mx = detail::positive_max(img, "gray_transform");
  return map(
      img,
      [=](double v) {
        const double n = v / mx;
        if (n < w_low) return 0.0;
        if (n > w_high) return 1.0;
        return std::clamp((n - w_low) / (w_high - w_low), 0.0, 1.0);
      },
      Domain::envelope);
}

/// 20 log10(env / max) clipped to [-DR, 0], mapped linearly onto [0,1].
inline Image log_compress(const Image& env, double dynamic_range_db) {
  if (!(dynamic_range_db > 0.0)) throw InvalidArgument("log_compress: dynamic range must be > 0");
  const double mx = detail::positive_max(env, "log_compress");
  return map(
      env,
      [=](double v) {
        if (v <= 0.0) return 0.0;
        const double db = std::max(20.0 * std::log10(v / mx), -dynamic_range_db);
        return std::clamp(1.0 + db / dynamic_range_db, 0.0, 1.0);
      },
      Domain::envelope);
}

/// Gamma correction followed by the gray-level transform.
inline Image display_map(const Image& img, const DisplayParams& prm) {
  prm.validate();
  return gray_transform(gamma_correct(img, prm.gamma), prm.w_low, prm.w_high);
}

/// Negative values (possible after despeckling) are clipped before display.
inline Image clip_nonnegative(const Image& img) {
  return map(img, [](double v) { return v < 0.0 ? 0.0 : v; }, Domain::envelope);
}

}  // namespace mfd
