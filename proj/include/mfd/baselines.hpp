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
#include <vector>

#include "mfd/image.hpp"

namespace mfd::baselines {

/// Box mean over a (2 radius + 1)^2 window, truncated at the border.
inline Image mean_filter(const Image& img, std::size_t radius) {
  Image out(img.rows(), img.cols(), Domain::estimate);
  const auto R = static_cast<std::ptrdiff_t>(radius);
  const auto M = static_cast<std::ptrdiff_t>(img.rows()), N = static_cast<std::ptrdiff_t>(img.cols());
  for (std::ptrdiff_t r = 0; r < M; ++r)
    for (std::ptrdiff_t c = 0; c < N; ++c) {
      double s = 0.0;
      std::size_t n = 0;
      for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, r - R); i <= std::min(M - 1, r + R); ++i)
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, c - R); j <= std::min(N - 1, c + R); ++j)
          s += img(static_cast<std::size_t>(i), static_cast<std::size_t>(j)), ++n;
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = s / static_cast<double>(n);
    }
  return out;
}

inline Image median_filter(const Image& img, std::size_t radius) {
  Image out(img.rows(), img.cols(), Domain::estimate);
  const auto R = static_cast<std::ptrdiff_t>(radius);
  const auto M = static_cast<std::ptrdiff_t>(img.rows()), N = static_cast<std::ptrdiff_t>(img.cols());
  std::vector<double> win;
  for (std::ptrdiff_t r = 0; r < M; ++r)
    for (std::ptrdiff_t c = 0; c < N; ++c) {
      win.clear();
      for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, r - R); i <= std::min(M - 1, r + R); ++i)
        for (std::ptrdiff_t j = std::max<std::ptrdiff_t>(0, c - R); j <= std::min(N - 1, c + R); ++j)
          win.push_back(img(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      const auto mid = win.begin() + static_cast<std::ptrdiff_t>(win.size() / 2);
      std::nth_element(win.begin(), mid, win.end());
      out(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) = *mid;
    }
  return out;
}

}  // namespace mfd::baselines
