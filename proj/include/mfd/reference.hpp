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
#include <cstddef>
#include <optional>

namespace mfd::reference {

inline constexpr std::array<double, 3> kSigmas{0.2, 0.4, 0.8};
inline constexpr std::array<std::size_t, 4> kFrames{5, 10, 15, 20};

/// Published NPM (dB) on the 256x256 phantom, indexed [sigma][frames].
inline constexpr double kNpmDb[3][4] = {
    {-31.65, -34.69, -36.41, -37.64},
    {-25.69, -28.72, -30.45, -31.64},
    {-19.96, -22.96, -24.68, -25.83},
};

/// Published MADS runtime (s) per frame count at the same size.
inline constexpr double kRuntimeS[4] = {0.61, 2.01, 3.95, 6.63};

struct QualityRow {
  double snr_db, psnr_db, ssim, epi;
};

/// Published despeckling quality per sigma.
inline constexpr QualityRow kMads[3] = {
    {28.88, 33.22, 0.9999, 0.93},
    {24.30, 28.79, 0.9998, 0.91},
    {21.63, 26.23, 0.9997, 0.89},
};

inline std::optional<std::size_t> sigma_index(double sigma) {
  for (std::size_t i = 0; i < kSigmas.size(); ++i)
    if (sigma == kSigmas[i]) return i;
  return std::nullopt;
}

inline std::optional<std::size_t> frames_index(std::size_t p) {
  for (std::size_t i = 0; i < kFrames.size(); ++i)
    if (p == kFrames[i]) return i;
  return std::nullopt;
}

}  // namespace mfd::reference
