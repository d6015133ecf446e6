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

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "mfd/baselines.hpp"
#include "mfd/config.hpp"
#include "mfd/mads.hpp"
#include "mfd/metrics.hpp"
#include "mfd/phantom.hpp"
#include "mfd/reference.hpp"
#include "mfd/report.hpp"
#include "mfd/specklesim.hpp"

namespace mfd {

/// Everything one simulated (sigma, p) run produces.
struct CellResult {
  report::Row row;
  MadsResult mads;
  double single_frame_snr_db = 0.0;
  double temporal_mean_snr_db = 0.0;
  double clamped_fraction = 0.0;
};

/// Phantom, speckle synthesis, full pipeline and metrics for one cell.
inline CellResult run_cell(const PipelineConfig& base, double sigma, std::size_t p) {
  PipelineConfig cfg = base;
  cfg.speckle.sigma = sigma;
  cfg.speckle.p = p;
  cfg.speckle.seed = cfg.seed;
  cfg.validate();
  const Image clean = generate_phantom(cfg.phantom);
  const auto syn = synthesize_frames_detailed(clean, cfg.speckle);
  const FrameStack truth = true_speckle(clean, syn.frames);
  const auto rois = effective_rois(cfg);
  metrics::SsimParams sp;
  sp.dynamic_range = cfg.ssim_dynamic_range;
  PipelineReference ref{&clean, &truth, rois, sp};
  CellResult out{{}, mads_pipeline(syn.frames, cfg.msne, cfg.mads, ref), 0.0, 0.0, syn.clamped_fraction()};
  const auto& rep = out.mads.report;
  out.row.method = "MADS";
  out.row.sigma = sigma;
  out.row.p = p;
  out.row.beta1 = cfg.msne.beta1;
  out.row.beta2 = cfg.mads.beta2;
  out.row.npm_db = rep.npm_db;
  out.row.snr_db = rep.snr_db;
  out.row.psnr_db = rep.psnr_db;
  out.row.ssim = rep.ssim;
  out.row.epi = rep.epi;
  out.row.runtime_s = cfg.timing ? rep.runtime_total_s : 0.0;
  if (const auto si = reference::sigma_index(sigma)) {
    if (const auto fi = reference::frames_index(p)) out.row.ref_npm_db = reference::kNpmDb[*si][*fi];
    const auto& q = reference::kMads[*si];
    out.row.ref_snr_db = q.snr_db;
    out.row.ref_psnr_db = q.psnr_db;
    out.row.ref_ssim = q.ssim;
    out.row.ref_epi = q.epi;
  }
  out.single_frame_snr_db = metrics::snr(clean, syn.frames[0]);
  out.temporal_mean_snr_db = metrics::snr(clean, syn.frames.temporal_mean());
  return out;
}

/// Comparison rows from simple filters; these are plumbing, not methods
/// with published numbers.
inline std::vector<report::Row> baseline_rows(const PipelineConfig& base, double sigma, std::size_t p) {
  PipelineConfig cfg = base;
  cfg.speckle.sigma = sigma;
  cfg.speckle.p = p;
  cfg.speckle.seed = cfg.seed;
  cfg.validate();
  const Image clean = generate_phantom(cfg.phantom);
  const FrameStack frames = synthesize_frames(clean, cfg.speckle);
  const auto rois = effective_rois(cfg);
  metrics::SsimParams sp;
  sp.dynamic_range = cfg.ssim_dynamic_range;
  std::vector<report::Row> rows;
  auto add = [&](const std::string& name, const Image& img, double seconds) {
    const auto m = metrics::evaluate(clean, img, rois, sp);
    report::Row r;
    r.method = name;
    r.sigma = sigma;
    r.p = p;
    r.snr_db = m.snr_db;
    r.psnr_db = m.psnr_db;
    r.ssim = m.ssim;
    r.epi = m.epi;
    r.runtime_s = cfg.timing ? seconds : 0.0;
    rows.push_back(r);
  };
  using clock = std::chrono::steady_clock;
  auto t0 = clock::now();
  const Image avg = frames.temporal_mean();
  add("baseline:temporal-mean", avg, std::chrono::duration<double>(clock::now() - t0).count());
  t0 = clock::now();
  add("baseline:mean-3x3-of-temporal-mean", baselines::mean_filter(avg, 1),
      std::chrono::duration<double>(clock::now() - t0).count());
  t0 = clock::now();
  add("baseline:median-3x3-of-temporal-mean", baselines::median_filter(avg, 1),
      std::chrono::duration<double>(clock::now() - t0).count());
  return rows;
}

}  // namespace mfd
