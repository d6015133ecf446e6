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

#include <cmath>

#include "mfd/phantom.hpp"
#include "mfd/specklesim.hpp"

using namespace mfd;

TEST(SpeckleParams, Validation) {
  EXPECT_THROW((SpeckleParams{0.0, 0.5, 3, 1}).validate(), InvalidArgument);
  EXPECT_THROW((SpeckleParams{0.2, 0.0, 3, 1}).validate(), InvalidArgument);
  EXPECT_THROW((SpeckleParams{0.2, 1.5, 3, 1}).validate(), InvalidArgument);
  EXPECT_THROW((SpeckleParams{0.2, 0.5, 1, 1}).validate(), InvalidArgument);
  for (double s : {0.2, 0.4, 0.8}) EXPECT_NO_THROW((SpeckleParams{s, 0.5, 5, 1}).validate());
}

TEST(Synthesis, VanishingNoiseReproducesClean) {
  const Image clean = generate_phantom({32, 0.01});
  const auto st = synthesize_frames(clean, {1e-12, 0.5, 4, 9});
  for (const auto& f : st)
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f[i], clean[i], 1e-9);
}

TEST(Synthesis, NormalizedResidualHasRequestedStd) {
  const Image clean = generate_phantom({256, 0.01});
  const auto syn = synthesize_frames_detailed(clean, {0.4, 0.5, 10, 123});
  for (const auto& f : syn.frames) {
    // Interior: bright pixels where clamping at 0 cannot occur at 4 sigma.
    double s = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (clean[i] < 0.9) continue;
      const double z = (f[i] - clean[i]) / std::sqrt(clean[i]);
      s += z, s2 += z * z, ++n;
    }
    ASSERT_GT(n, 100u);
    const double m = s / n;
    EXPECT_NEAR(std::sqrt(s2 / n - m * m), 0.4, 0.02);
  }
}

TEST(Synthesis, DeterministicAndSubstreamsIndependentOfFrameCount) {
  const Image clean = generate_phantom({16, 0.01});
  const auto a = synthesize_frames(clean, {0.3, 0.5, 3, 5});
  const auto b = synthesize_frames(clean, {0.3, 0.5, 3, 5});
  const auto c = synthesize_frames(clean, {0.3, 0.5, 5, 5});
  EXPECT_EQ(a, b);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(a[k], c[k]);
  const auto d = synthesize_frames(clean, {0.3, 0.5, 3, 6});
  EXPECT_FALSE(a == d);
}

TEST(Synthesis, FramesPairwiseDistinct) {
  const Image clean = generate_phantom({16, 0.01});
  const auto st = synthesize_frames(clean, {0.01, 0.5, 8, 2});
  for (std::size_t i = 0; i < st.size(); ++i)
    for (std::size_t j = i + 1; j < st.size(); ++j) EXPECT_FALSE(st[i] == st[j]);
}

TEST(Synthesis, ClampsNegativesAndCountsThem) {
  const Image clean = generate_phantom({64, 0.01});
  const auto syn = synthesize_frames_detailed(clean, {0.8, 0.5, 4, 1});
  EXPECT_GT(syn.clamped_pixels, 0u);
  std::size_t zeros = 0;
  for (const auto& f : syn.frames)
    for (double v : f.values()) {
      EXPECT_GE(v, 0.0);
      zeros += v == 0.0;
    }
  EXPECT_EQ(zeros, syn.clamped_pixels);
  EXPECT_EQ(syn.frames.domain(), Domain::envelope);
}

TEST(Synthesis, RejectsNonPositiveClean) {
  Image clean(4, 4, Domain::envelope, 1.0);
  clean[5] = 0.0;
  EXPECT_THROW(synthesize_frames(clean, {0.2, 0.5, 3, 1}), InvalidArgument);
}

TEST(TrueSpeckle, NoiselessIsOne) {
  const Image clean = generate_phantom({16, 0.01});
  const FrameStack st({clean, clean, clean}, Domain::envelope);
  for (const auto& u : true_speckle(clean, st))
    for (double v : u.values()) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(TrueSpeckle, MatchesAlgebraicIdentityFromDraws) {
  const Image clean = generate_phantom({32, 0.01});
  const SpeckleParams sp{0.2, 0.5, 4, 77};
  const auto syn = synthesize_frames_detailed(clean, sp);
  const auto u = true_speckle(clean, syn.frames);
  for (std::size_t k = 0; k < sp.p; ++k)
    for (std::size_t i = 0; i < clean.size(); ++i) {
      if (syn.frames[k][i] == 0.0) continue;  // clamped pixels
      const double expect = 1.0 + std::pow(clean[i], sp.eta - 1.0) * syn.draws[k][i];
      EXPECT_NEAR(u[k][i], expect, 1e-12 * std::max(1.0, std::abs(expect)));
    }
}

TEST(TrueSpeckle, ConstantCleanGivesConstantField) {
  const Image clean(3, 3, Domain::envelope, 2.0);
  const FrameStack st({Image(3, 3, Domain::envelope, 2.0 * 1.25), Image(3, 3, Domain::envelope, 2.0)}, Domain::envelope);
  const auto u = true_speckle(clean, st);
  for (double v : u[0].values()) EXPECT_DOUBLE_EQ(v, 1.25);
  EXPECT_THROW(true_speckle(Image(2, 2, Domain::envelope, 1.0), st), InvalidArgument);
}

TEST(TrueSpeckle, FrameMeanConvergesToOne) {
  // Small bright image keeps the p = 200 check cheap and clamp-free.
  Image clean(4, 4, Domain::envelope);
  for (std::size_t i = 0; i < clean.size(); ++i) clean[i] = 0.5 + 0.03 * double(i);
  const SpeckleParams sp{0.2, 0.5, 200, 8};
  const auto u = true_speckle(clean, synthesize_frames(clean, sp));
  for (std::size_t i = 0; i < clean.size(); ++i) {
    double m = 0.0;
    for (const auto& f : u) m += f[i];
    m /= double(sp.p);
    EXPECT_LE(std::abs(m - 1.0), 3.0 * sp.sigma * std::pow(clean[i], sp.eta - 1.0) / std::sqrt(double(sp.p)));
  }
}

TEST(NormalStream, MomentsOfStandardNormal) {
  NormalStream ns(99);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = ns.next();
    s += z, s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.015);
}
