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
#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "mfd/deconv.hpp"
#include "mfd/synthetic.hpp"
#include "oracles.hpp"

using namespace mfd;

namespace {

struct Simo {
  std::vector<std::vector<double>> x, truth_padded, truth;
};

// Channels x_i = s * h_i with white h_i of length L - len(s) + 1.
Simo white_simo(std::size_t C, std::size_t L, const std::vector<double>& s, std::uint64_t seed) {
  NormalStream ns(seed);
  Simo out;
  const std::size_t T = L - s.size() + 1;
  for (std::size_t i = 0; i < C; ++i) {
    std::vector<double> h(T);
    for (auto& v : h) v = ns.next();
    out.x.push_back(convolve(h, s));
    auto hp = h;
    hp.resize(L, 0.0);
    out.truth.push_back(h);
    out.truth_padded.push_back(hp);
  }
  return out;
}

std::vector<double> stacked(const std::vector<std::vector<double>>& v) {
  std::vector<double> out;
  for (const auto& a : v) out.insert(out.end(), a.begin(), a.end());
  return out;
}

}  // namespace

TEST(CrossRelation, VanishesAtTrueChannels) {
  const auto sim = white_simo(4, 128, bandpass_psf(), 3);
  EXPECT_LE(cross_relation_cost(sim.x, sim.truth), 1e-20);
}

TEST(CrossRelation, PositiveAwayFromTruth) {
  auto sim = white_simo(3, 64, bandpass_psf(), 4);
  sim.truth[1][5] += 0.1;
  EXPECT_GT(cross_relation_cost(sim.x, sim.truth), 1e-6);
}

TEST(BlockPlan, CoversSignalWithPadding) {
  const auto p = BlockPlan::make(255, 2, Direction::axial);
  EXPECT_EQ(p.block_length, 128u);
  EXPECT_GE(p.blocks * p.block_length, 255u);
  EXPECT_THROW(BlockPlan::make(3, 4, Direction::axial), InvalidArgument);
  EXPECT_THROW(BlockPlan::make(3, 0, Direction::axial), InvalidArgument);
}

TEST(Bmcflms, RecoversWhiteTrfThroughBandpassPsf) {
  const auto sim = white_simo(4, 256, bandpass_psf(), 11);
  DeconvConfig cfg;
  const auto est = bmcflms_pass(sim.x, BlockPlan::make(256, 1, Direction::axial), 8, cfg, sim.truth_padded);
  const double npm = oracle::npm(stacked(sim.truth_padded), stacked(est.channels));
  EXPECT_LE(npm, -20.0);
  ASSERT_FALSE(est.npm_trace.empty());
  EXPECT_NEAR(est.npm_trace.back(), npm, 1e-6);
  // Recovered PSF matches up to the blind sign, which is fixed positive-peak.
  auto s = bandpass_psf();
  double n = 0;
  for (double v : s) n += v * v;
  for (auto& v : s) v /= std::sqrt(n);
  EXPECT_GE(std::abs(oracle::cosine(s, est.psf.taps)), 0.99);
}

TEST(Bmcflms, UnitNormAfterEveryIteration) {
  const auto sim = white_simo(3, 200, bandpass_psf(), 12);
  DeconvConfig cfg;
  cfg.max_iters = 300;
  const auto est = bmcflms_pass(sim.x, BlockPlan::make(200, 2, Direction::axial), 8, cfg);
  ASSERT_EQ(est.norm_trace.size(), est.iterations);
  for (double n : est.norm_trace) EXPECT_NEAR(n, 1.0, 1e-10);
  double n2 = 0;
  for (double v : stacked(est.channels)) n2 += v * v;
  EXPECT_NEAR(std::sqrt(n2), 1.0, 1e-10);
}

TEST(Bmcflms, CostNeverIncreases) {
  const auto sim = white_simo(4, 256, bandpass_psf(), 13);
  DeconvConfig cfg;
  cfg.max_iters = 400;
  const auto est = bmcflms_pass(sim.x, BlockPlan::make(256, 2, Direction::axial), 8, cfg);
  for (std::size_t q = 1; q < est.cost_trace.size(); ++q) EXPECT_LE(est.cost_trace[q], est.cost_trace[q - 1] + 1e-12);
}

TEST(Bmcflms, ImpulsePsfReturnsInputUpToScale) {
  const auto sim = white_simo(4, 128, {1.0}, 14);
  DeconvConfig cfg;
  const auto est = bmcflms_pass(sim.x, BlockPlan::make(128, 1, Direction::axial), 1, cfg);
  EXPECT_GE(std::abs(oracle::cosine(stacked(sim.x), stacked(est.channels))), 0.999);
}

TEST(Bmcflms, InvariantToInputScale) {
  const auto sim = white_simo(3, 128, bandpass_psf(), 15);
  auto scaled = sim.x;
  for (auto& ch : scaled)
    for (auto& v : ch) v *= 37.5;
  DeconvConfig cfg;
  cfg.max_iters = 200;
  const auto plan = BlockPlan::make(128, 1, Direction::axial);
  const auto a = bmcflms_pass(sim.x, plan, 8, cfg), b = bmcflms_pass(scaled, plan, 8, cfg);
  EXPECT_GE(std::abs(oracle::cosine(stacked(a.channels), stacked(b.channels))), 1.0 - 1e-9);
}

TEST(Bmcflms, RejectsBadChannels) {
  DeconvConfig cfg;
  const auto plan = BlockPlan::make(16, 1, Direction::axial);
  std::vector<std::vector<double>> one{std::vector<double>(16, 1.0)};
  EXPECT_THROW(bmcflms_pass(one, plan, 2, cfg), InvalidArgument);
  std::vector<std::vector<double>> zero{std::vector<double>(16, 1.0), std::vector<double>(16, 0.0)};
  EXPECT_THROW(bmcflms_pass(zero, plan, 2, cfg), InvalidArgument);
  std::vector<std::vector<double>> ok{std::vector<double>(16, 1.0), std::vector<double>(16, 2.0)};
  EXPECT_THROW(bmcflms_pass(ok, plan, 17, cfg), InvalidArgument);
}

TEST(Deconvolve2d, NarrowsAutocorrelationInBothDirections) {
  const auto scene = separable_blur_scene(128, 32, 21);
  DeconvConfig cfg;
  const Image out = deconvolve_2d(scene.rf, cfg);
  const double in_ax = oracle::half_amplitude_width(oracle::columns(scene.rf));
  const double out_ax = oracle::half_amplitude_width(oracle::columns(out));
  const double in_lat = oracle::half_amplitude_width(oracle::rows(scene.rf));
  const double out_lat = oracle::half_amplitude_width(oracle::rows(out));
  EXPECT_LT(out_ax, in_ax);
  EXPECT_LT(out_lat, in_lat);
}

TEST(Deconvolve2d, ImpulsePsfsPreserveImage) {
  const auto scene = separable_blur_scene(64, 16, 22, 1.0, {1.0}, {1.0});
  DeconvConfig cfg;
  cfg.psf_length_axial = 1;
  cfg.psf_length_lateral = 1;
  const Image out = deconvolve_2d(scene.rf, cfg);
  EXPECT_GE(std::abs(oracle::cosine(scene.rf.values(), out.values())), 0.999);
}

TEST(Cepstrum, ImpulsePsfIsNearIdentity) {
  const auto scene = separable_blur_scene(256, 256, 31, 1.0, {1.0}, {1.0});
  const Image out = cepstrum_deconvolve(scene.rf, 8, 1e-3);
  double e = 0, n = 0;
  for (std::size_t i = 0; i < out.size(); ++i) e += (out[i] - scene.rf[i]) * (out[i] - scene.rf[i]), n += scene.rf[i] * scene.rf[i];
  EXPECT_LE(std::sqrt(e / n), 0.01);
}

namespace {
// Std over frequency of the column-averaged log magnitude spectrum.
double log_spectrum_spread(const Image& img) {
  const std::size_t M = img.rows();
  std::vector<double> avg(M / 2 - 1, 0.0);
  for (std::size_t c = 0; c < img.cols(); ++c)
    for (std::size_t f = 1; f < M / 2; ++f) {
      std::complex<double> s = 0;
      for (std::size_t t = 0; t < M; ++t) s += img(t, c) * std::polar(1.0, -2.0 * std::numbers::pi * double(f * t) / double(M));
      avg[f - 1] += std::log(std::abs(s)) / double(img.cols());
    }
  double m = 0, v = 0;
  for (double a : avg) m += a / double(avg.size());
  for (double a : avg) v += (a - m) * (a - m) / double(avg.size());
  return std::sqrt(v);
}
}  // namespace

TEST(Cepstrum, FlattensSpectrumOfBandpassPsf) {
  const auto scene = separable_blur_scene(256, 64, 32, 1.0, bandpass_psf(), {1.0});
  const Image out = cepstrum_deconvolve(scene.rf, 16, 1e-3);
  EXPECT_LE(log_spectrum_spread(out), 0.5 * log_spectrum_spread(scene.rf));
}

TEST(Cepstrum, ValidatesArguments) {
  const Image rf(16, 4, Domain::rf, 1.0);
  EXPECT_THROW(cepstrum_deconvolve(rf, 16, 1e-3), InvalidArgument);
  EXPECT_THROW(cepstrum_deconvolve(rf, 0, 1e-3), InvalidArgument);
  EXPECT_THROW(cepstrum_deconvolve(rf, 4, 0.0), InvalidArgument);
  EXPECT_THROW(cepstrum_deconvolve(Image(16, 4, Domain::rf, 0.0), 4, 1e-3), InvalidArgument);
}

TEST(Cepstrum, Deterministic) {
  const auto scene = separable_blur_scene(64, 16, 33);
  EXPECT_EQ(cepstrum_deconvolve(scene.rf, 8, 1e-3), cepstrum_deconvolve(scene.rf, 8, 1e-3));
}

TEST(Cepstrum, MuchFasterThanBlindPass) {
  const auto scene = separable_blur_scene(256, 64, 34);
  using clk = std::chrono::steady_clock;
  const auto t0 = clk::now();
  const Image b = deconvolve_2d(scene.rf, DeconvConfig{});
  const auto t1 = clk::now();
  const Image c = cepstrum_deconvolve(scene.rf, 16, 1e-3);
  const auto t2 = clk::now();
  const double tb = std::chrono::duration<double>(t1 - t0).count();
  const double tc = std::chrono::duration<double>(t2 - t1).count();
  RecordProperty("blind_s", std::to_string(tb));
  RecordProperty("cepstrum_s", std::to_string(tc));
  EXPECT_GE(tb, 50.0 * tc) << "blind " << tb << " s, cepstrum " << tc << " s";
  EXPECT_EQ(b.rows(), c.rows());
}
