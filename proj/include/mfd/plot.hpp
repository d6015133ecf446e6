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
#include <filesystem>
#include <span>
#include <vector>

#include "mfd/image.hpp"
#include "mfd/image_io.hpp"

namespace mfd::plot {

/// Rasterizes a convergence trace as a dark polyline on a light
/// background with a one-pixel frame. Axes are implicit: x spans the
/// trace, y spans [min, max] of the (optionally log10) values.
inline Image render_trace(std::span<const double> values, bool log_y, std::size_t width = 640,
                          std::size_t height = 360) {
  if (width < 8 || height < 8) throw InvalidArgument("render_trace: canvas too small");
  Image img(height, width, Domain::envelope, 1.0);
  for (std::size_t c = 0; c < width; ++c) img(0, c) = img(height - 1, c) = 0.6;
  for (std::size_t r = 0; r < height; ++r) img(r, 0) = img(r, width - 1) = 0.6;
  std::vector<double> y;
  for (double v : values) {
    const double t = log_y ? (v > 0.0 ? std::log10(v) : NAN) : v;
    if (std::isfinite(t)) y.push_back(t);
  }
  if (y.size() < 2) return img;
  const double lo = *std::min_element(y.begin(), y.end()), hi = *std::max_element(y.begin(), y.end());
  const double span = hi > lo ? hi - lo : 1.0;
  const double W = static_cast<double>(width - 3), H = static_cast<double>(height - 3);
  auto px = [&](std::size_t i) { return 1.0 + W * static_cast<double>(i) / static_cast<double>(y.size() - 1); };
  auto py = [&](double v) { return 1.0 + H * (1.0 - (v - lo) / span); };
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    const double x0 = px(i), y0 = py(y[i]), x1 = px(i + 1), y1 = py(y[i + 1]);
    const int steps = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
    for (int s = 0; s <= steps; ++s) {
      const double t = static_cast<double>(s) / steps;
      const auto r = static_cast<std::size_t>(std::lround(y0 + t * (y1 - y0)));
      const auto c = static_cast<std::size_t>(std::lround(x0 + t * (x1 - x0)));
      img(std::min(r, height - 2), std::min(c, width - 2)) = 0.0;
    }
  }
  return img;
}

inline void write_trace_png(const std::filesystem::path& path, std::span<const double> values, bool log_y) {
  io::write_png(path, render_trace(values, log_y));
}

}  // namespace mfd::plot
