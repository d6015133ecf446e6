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

#include <filesystem>
#include <fstream>

#include "mfd/config.hpp"

using namespace mfd;

TEST(Config, DefaultsValidate) {
  PipelineConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(get_config_value(cfg, "msne.beta1"), "0");
  EXPECT_EQ(get_config_value(cfg, "frames"), "10");
  EXPECT_EQ(get_config_value(cfg, "mads.grad_avg_weight"), "0.69999999999999996");
}

TEST(Config, SetAndGetRoundTrip) {
  PipelineConfig cfg;
  set_config_value(cfg, "sigma", "0.8");
  set_config_value(cfg, "msne.cost_form", "quartic");
  set_config_value(cfg, "mads.denoiser", "hard_threshold");
  set_config_value(cfg, "epi.rois", "1,2,3,4; 5,6,7,8");
  set_config_value(cfg, "report.timing", "false");
  EXPECT_EQ(cfg.speckle.sigma, 0.8);
  EXPECT_EQ(cfg.msne.cost_form, CostForm::quartic);
  EXPECT_EQ(cfg.mads.denoiser.kind, DenoiserConfig::Kind::hard_threshold);
  ASSERT_EQ(cfg.rois.size(), 2u);
  EXPECT_EQ(cfg.rois[1].width, 8u);
  EXPECT_FALSE(cfg.timing);
  EXPECT_EQ(get_config_value(cfg, "epi.rois"), "1,2,3,4;5,6,7,8");
}

TEST(Config, PrintedConfigParsesBackIdentically) {
  PipelineConfig a;
  set_config_value(a, "mads.beta2", "0.125");
  set_config_value(a, "seed", "42");
  PipelineConfig b;
  apply_config_text(b, print_config(a));
  EXPECT_EQ(print_config(a), print_config(b));
  EXPECT_EQ(b.speckle.seed, 42u);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  PipelineConfig cfg;
  EXPECT_THROW(set_config_value(cfg, "not.a.key", "1"), InvalidArgument);
  EXPECT_THROW(set_config_value(cfg, "sigma", "abc"), InvalidArgument);
  EXPECT_THROW(set_config_value(cfg, "frames", "-3"), InvalidArgument);
  EXPECT_THROW(set_config_value(cfg, "msne.cost_form", "cubic"), InvalidArgument);
  EXPECT_THROW(set_config_value(cfg, "epi.rois", "1,2,3"), InvalidArgument);
  EXPECT_THROW(apply_config_text(cfg, "sigma 0.3\n"), InvalidArgument);
}

TEST(Config, ValidationCatchesInvariants) {
  PipelineConfig cfg;
  cfg.speckle.p = 1;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.display.w_low = 0.99;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.deconv_method = "other";
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.mads.grad_avg_weight = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.phantom.size = 4;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST(Config, FileWithComments) {
  const auto path = std::filesystem::temp_directory_path() / "mfd_cfg_test.conf";
  std::ofstream(path) << "# comment\nsigma = 0.2  # trailing\n\nframes=5\n";
  PipelineConfig cfg;
  apply_config_file(cfg, path.string());
  EXPECT_EQ(cfg.speckle.sigma, 0.2);
  EXPECT_EQ(cfg.speckle.p, 5u);
  EXPECT_THROW(apply_config_file(cfg, "/nonexistent/x.conf"), IoError);
}

TEST(Config, DefaultRoisInsideImage) {
  for (std::size_t size : {32u, 64u, 256u}) {
    const auto rois = default_rois(size);
    EXPECT_EQ(rois.size(), 6u);
    for (const auto& r : rois) {
      EXPECT_LE(r.row + r.height, size);
      EXPECT_LE(r.col + r.width, size);
    }
  }
}
