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
#include <string_view>
#include <vector>

#include "mfd/image.hpp"

namespace mfd {

/// Recorded in every report so runs can be reproduced elsewhere.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64-substreams/box-muller";

struct SpeckleParams {
  double sigma = 0.4;
  double eta = 0.5;
  std::size_t p = 10;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw InvalidArgument("SpeckleParams: sigma must be > 0");
    if (!(eta > 0.0 && eta <= 1.0)) throw InvalidArgument("SpeckleParams: eta must lie in (0, 1]");
    if (p < 2) throw InvalidArgument("SpeckleParams: p ≥ 2 required, got " + std::to_string(p));
  }
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed of frame k's substream; independent of how many frames are drawn.
inline std::uint64_t frame_seed(std::uint64_t seed, std::size_t k) {
  return splitmix64(splitmix64(seed) ^ splitmix64(0x5eedULL + k));
}

/// Standard normals via Box-Muller on raw 53-bit uniforms. Avoids
/// std::normal_distribution, whose output is implementation-defined.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : eng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;          // [0,1)
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double th = 2.0 * std::numbers::pi * u2;
    spare_ = rad * std::sin(th);
    has_spare_ = true;
    return rad * std::cos(th);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// The Gaussian fields V_k ~ N(0, sigma^2), one per frame.
inline std::vector<Image> speckle_draws(std::size_t rows, std::size_t cols, const SpeckleParams& params) {
  params.validate();
  std::vector<Image> out;
  out.reserve(params.p);
  for (std::size_t k = 0; k < params.p; ++k) {
    NormalStream ns(frame_seed(params.seed, k));
    Image v(rows, cols, Domain::estimate);
    for (auto& x : v.values()) x = params.sigma * ns.next();
    out.push_back(std::move(v));
  }
  return out;
}

struct SyntheticStack {
  FrameStack frames;
  std::vector<Image> draws;
  std::size_t clamped_pixels = 0;

  double clamped_fraction() const {
    return static_cast<double>(clamped_pixels) /
           static_cast<double>(frames.size() * frames.pixels());
  }
};

inline void require_strictly_positive(const Image& clean, std::string_view who) {
  for (double v : clean.values())
    if (!(v > 0.0)) throw InvalidArgument(std::string(who) + ": clean image must be strictly positive");
}

/// Frame k = max(0, r + r^eta V_k). Draws are kept for ground-truth checks.
inline SyntheticStack synthesize_frames_detailed(const Image& clean, const SpeckleParams& params) {
  params.validate();
  require_strictly_positive(clean, "synthesize_frames");
  auto draws = speckle_draws(clean.rows(), clean.cols(), params);
  std::vector<double> reta(clean.size());
  for (std::size_t i = 0; i < clean.size(); ++i) reta[i] = std::pow(clean[i], params.eta);
  std::vector<Image> frames;
  frames.reserve(params.p);
  std::size_t clamped = 0;
  for (const auto& v : draws) {
    Image f(clean.rows(), clean.cols(), Domain::envelope);
    for (std::size_t i = 0; i < clean.size(); ++i) {
      const double h = clean[i] + reta[i] * v[i];
      if (h < 0.0) ++clamped;
      f[i] = h < 0.0 ? 0.0 : h;
    }
    frames.push_back(std::move(f));
  }
  return {FrameStack(std::move(frames), Domain::envelope), std::move(draws), clamped};
}

inline FrameStack synthesize_frames(const Image& clean, const SpeckleParams& params) {
  return synthesize_frames_detailed(clean, params).frames;
}

/// u_k = frame_k / r, the ground truth for speckle estimation.
inline FrameStack true_speckle(const Image& clean, const FrameStack& stack) {
  require_strictly_positive(clean, "true_speckle");
  if (!stack.same_shape(clean)) throw InvalidArgument("true_speckle: dimension mismatch");
  std::vector<Image> out;
  out.reserve(stack.size());
  for (const auto& f : stack) out.push_back(zip(f, clean, [](double h, double r) { return h / r; }));
  return FrameStack(std::move(out), Domain::estimate);
}

}  // namespace mfd
