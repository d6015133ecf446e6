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

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mfd/error.hpp"
#include "mfd/specklesim.hpp"

namespace mfd::report {

/// Metric definitions recorded with every report.
inline constexpr const char* kEpiDefinition = "laplacian3x3-pearson-mean-over-rois";
inline constexpr const char* kSsimDefinition = "uniform-8x8-valid-windows-k1=0.01-k2=0.03";

struct Row {
  std::string method = "MADS";
  double sigma = 0.0;
  std::size_t p = 0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  std::optional<double> npm_db, snr_db, psnr_db, ssim, epi;
  double runtime_s = 0.0;
  /// Published reference value for the same cell, when one exists.
  std::optional<double> ref_npm_db, ref_snr_db, ref_psnr_db, ref_ssim, ref_epi;
};

inline std::string fmt(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(10);
  os << *v;
  return os.str();
}

inline std::string fmt(double v) { return fmt(std::optional<double>(v)); }

inline std::string to_csv(const std::vector<Row>& rows, bool with_ref) {
  std::ostringstream os;
  os << "# rng=" << kRngAlgorithm << " epi=" << kEpiDefinition << " ssim=" << kSsimDefinition << "\n";
  os << "method,sigma,p,beta1,beta2,NPM,SNR,PSNR,SSIM,EPI,runtime_s";
  if (with_ref) os << ",ref_NPM,ref_SNR,ref_PSNR,ref_SSIM,ref_EPI";
  os << "\n";
  for (const auto& r : rows) {
    os << r.method << ',' << fmt(r.sigma) << ',' << r.p << ',' << fmt(r.beta1) << ',' << fmt(r.beta2) << ','
       << fmt(r.npm_db) << ',' << fmt(r.snr_db) << ',' << fmt(r.psnr_db) << ',' << fmt(r.ssim) << ','
       << fmt(r.epi) << ',' << fmt(r.runtime_s);
    if (with_ref)
      os << ',' << fmt(r.ref_npm_db) << ',' << fmt(r.ref_snr_db) << ',' << fmt(r.ref_psnr_db) << ','
         << fmt(r.ref_ssim) << ',' << fmt(r.ref_epi);
    os << "\n";
  }
  return os.str();
}

inline nlohmann::json to_json(const std::vector<Row>& rows) {
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(nullptr); };
  nlohmann::json j;
  j["rng"] = kRngAlgorithm;
  j["epi_definition"] = kEpiDefinition;
  j["ssim_definition"] = kSsimDefinition;
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows)
    j["rows"].push_back({{"method", r.method}, {"sigma", r.sigma}, {"p", r.p}, {"beta1", r.beta1},
                         {"beta2", r.beta2}, {"NPM", opt(r.npm_db)}, {"SNR", opt(r.snr_db)},
                         {"PSNR", opt(r.psnr_db)}, {"SSIM", opt(r.ssim)}, {"EPI", opt(r.epi)},
                         {"runtime_s", r.runtime_s}});
  return j;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << text;
  if (!os) throw IoError("write failed for '" + path + "'");
}

}  // namespace mfd::report
