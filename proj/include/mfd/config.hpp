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

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mfd/deconv.hpp"
#include "mfd/mads.hpp"
#include "mfd/metrics.hpp"
#include "mfd/msne.hpp"
#include "mfd/phantom.hpp"
#include "mfd/postproc.hpp"
#include "mfd/specklesim.hpp"

namespace mfd {

/// Order of the display chain: despeckled image straight to the gray-level
/// map, or log compression first.
enum class DisplayOrder { linear, log_compressed };

struct PipelineConfig {
  std::uint64_t seed = 1;
  PhantomSpec phantom{};
  SpeckleParams speckle{};
  MsneConfig msne{};
  MadsConfig mads{};
  DeconvConfig deconv{};
  std::string deconv_method = "bmcflms";
  std::size_t cepstrum_lifter = 16;
  double cepstrum_noise_floor = 1e-3;
  DisplayParams display{};
  DisplayOrder display_order = DisplayOrder::linear;
  double ssim_dynamic_range = 1.0;
  /// Empty means the built-in ROI set scaled to the phantom size.
  std::vector<metrics::Roi> rois{};
  std::string out_dir = "out";
  /// When false, reports record runtime as 0 so they are bit-reproducible.
  bool timing = true;

  void validate() const {
    phantom.validate();
    speckle.validate();
    msne.validate();
    mads.validate();
    deconv.validate();
    display.validate();
    if (deconv_method != "bmcflms" && deconv_method != "cepstrum")
      throw InvalidArgument("config: deconv.method must be bmcflms or cepstrum");
    if (cepstrum_lifter < 1) throw InvalidArgument("config: cepstrum.lifter_cutoff must be >= 1");
    if (!(cepstrum_noise_floor > 0.0)) throw InvalidArgument("config: cepstrum.noise_floor must be > 0");
    if (!(ssim_dynamic_range > 0.0)) throw InvalidArgument("config: ssim.dynamic_range must be > 0");
    if (out_dir.empty()) throw InvalidArgument("config: out_dir must not be empty");
  }
};

/// Edge-straddling ROIs for the phantom, specified on a 256 grid and scaled.
inline std::vector<metrics::Roi> default_rois(std::size_t size) {
  static constexpr std::size_t base[][4] = {
      {0, 116, 24, 24},    // top of the outer ellipse
      {232, 116, 24, 24},  // bottom of the outer ellipse
      {116, 28, 24, 24},   // left
      {116, 204, 24, 24},  // right
      {116, 132, 24, 24},  // inner left edge of the right dark ellipse
      {40, 116, 24, 24},   // top edge of the upper bright ellipse
  };
  std::vector<metrics::Roi> out;
  for (const auto& b : base) {
    auto sc = [&](std::size_t v) { return v * size / 256; };
    metrics::Roi r{sc(b[0]), sc(b[1]), std::max<std::size_t>(3, sc(b[2])), std::max<std::size_t>(3, sc(b[3]))};
    r.row = std::min(r.row, size - r.height);
    r.col = std::min(r.col, size - r.width);
    out.push_back(r);
  }
  return out;
}

inline std::vector<metrics::Roi> effective_rois(const PipelineConfig& cfg) {
  return cfg.rois.empty() ? default_rois(cfg.phantom.size) : cfg.rois;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto* b = v.data();
  const auto* e = v.data() + v.size();
  auto [ptr, ec] = std::from_chars(b, e, out);
  if (ec != std::errc{} || ptr != e) throw InvalidArgument("config: bad value '" + v + "' for " + key);
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw InvalidArgument("config: bad boolean '" + v + "' for " + key);
}

inline std::vector<metrics::Roi> parse_rois(const std::string& key, const std::string& v) {
  std::vector<metrics::Roi> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ';')) {
    item = trim(item);
    if (item.empty()) continue;
    std::stringstream is(item);
    std::string f;
    std::vector<std::size_t> q;
    while (std::getline(is, f, ',')) q.push_back(parse_number<std::size_t>(key, trim(f)));
    if (q.size() != 4) throw InvalidArgument("config: ROI '" + item + "' must be row,col,height,width");
    out.push_back({q[0], q[1], q[2], q[3]});
  }
  return out;
}

inline std::string format_rois(const std::vector<metrics::Roi>& rois) {
  std::string s;
  for (std::size_t i = 0; i < rois.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(rois[i].row) + ',' + std::to_string(rois[i].col) + ',' + std::to_string(rois[i].height) +
         ',' + std::to_string(rois[i].width);
  }
  return s;
}

struct Field {
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

/// Ordered key table; the order is the print-config order.
inline const std::vector<std::pair<std::string, Field>>& fields() {
  using C = PipelineConfig;
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    auto add = [&](std::string k, auto get, auto set) { t.push_back({std::move(k), Field{get, set}}); };
#define MFD_DOUBLE(key, expr) \
  add(key, [](const C& c) { return format_double(c.expr); }, \
      [](C& c, const std::string& v) { c.expr = parse_number<double>(key, v); })
#define MFD_SIZE(key, expr) \
  add(key, [](const C& c) { return std::to_string(c.expr); }, \
      [](C& c, const std::string& v) { c.expr = parse_number<std::size_t>(key, v); })
    add("seed", [](const C& c) { return std::to_string(c.seed); },
        [](C& c, const std::string& v) { c.seed = c.speckle.seed = parse_number<std::uint64_t>("seed", v); });
    MFD_SIZE("phantom.size", phantom.size);
    MFD_DOUBLE("phantom.contrast_floor", phantom.contrast_floor);
    MFD_DOUBLE("sigma", speckle.sigma);
    MFD_DOUBLE("eta", speckle.eta);
    MFD_SIZE("frames", speckle.p);
    MFD_DOUBLE("msne.beta1", msne.beta1);
    MFD_SIZE("msne.max_iters", msne.max_iters);
    MFD_DOUBLE("msne.tol", msne.tol);
    add("msne.cost_form", [](const C& c) { return std::string(c.msne.cost_form == CostForm::quadratic ? "quadratic" : "quartic"); },
        [](C& c, const std::string& v) {
          if (v == "quadratic") c.msne.cost_form = CostForm::quadratic;
          else if (v == "quartic") c.msne.cost_form = CostForm::quartic;
          else throw InvalidArgument("config: msne.cost_form must be quadratic or quartic");
        });
    MFD_SIZE("msne.max_halvings", msne.max_halvings);
    MFD_DOUBLE("msne.descent_slack", msne.descent_slack);
    MFD_DOUBLE("mads.beta2", mads.beta2);
    MFD_DOUBLE("mads.grad_avg_weight", mads.grad_avg_weight);
    MFD_SIZE("mads.max_iters", mads.max_iters);
    MFD_DOUBLE("mads.tol", mads.tol);
    add("mads.denoiser",
        [](const C& c) { return std::string(c.mads.denoiser.kind == DenoiserConfig::Kind::none ? "none" : "hard_threshold"); },
        [](C& c, const std::string& v) {
          if (v == "none") c.mads.denoiser.kind = DenoiserConfig::Kind::none;
          else if (v == "hard_threshold") c.mads.denoiser.kind = DenoiserConfig::Kind::hard_threshold;
          else throw InvalidArgument("config: mads.denoiser must be none or hard_threshold");
        });
    MFD_DOUBLE("mads.denoiser_level", mads.denoiser.level);
    MFD_SIZE("mads.max_halvings", mads.max_halvings);
    MFD_DOUBLE("mads.descent_slack", mads.descent_slack);
    add("deconv.method", [](const C& c) { return c.deconv_method; },
        [](C& c, const std::string& v) { c.deconv_method = v; });
    MFD_SIZE("deconv.max_iters", deconv.max_iters);
    MFD_DOUBLE("deconv.tol", deconv.tol);
    MFD_SIZE("deconv.blocks_axial", deconv.blocks_axial);
    MFD_SIZE("deconv.blocks_lateral", deconv.blocks_lateral);
    MFD_SIZE("deconv.psf_length_axial", deconv.psf_length_axial);
    MFD_SIZE("deconv.psf_length_lateral", deconv.psf_length_lateral);
    MFD_DOUBLE("deconv.precond_delta", deconv.precond_delta);
    MFD_SIZE("deconv.refresh_every", deconv.refresh_every);
    MFD_SIZE("cepstrum.lifter_cutoff", cepstrum_lifter);
    MFD_DOUBLE("cepstrum.noise_floor", cepstrum_noise_floor);
    MFD_DOUBLE("display.gamma", display.gamma);
    MFD_DOUBLE("display.w_low", display.w_low);
    MFD_DOUBLE("display.w_high", display.w_high);
    MFD_DOUBLE("display.dynamic_range_db", display.dynamic_range_db);
    add("display.order", [](const C& c) { return std::string(c.display_order == DisplayOrder::linear ? "linear" : "log_compressed"); },
        [](C& c, const std::string& v) {
          if (v == "linear") c.display_order = DisplayOrder::linear;
          else if (v == "log_compressed") c.display_order = DisplayOrder::log_compressed;
          else throw InvalidArgument("config: display.order must be linear or log_compressed");
        });
    MFD_DOUBLE("ssim.dynamic_range", ssim_dynamic_range);
    add("epi.rois", [](const C& c) { return format_rois(c.rois); },
        [](C& c, const std::string& v) { c.rois = parse_rois("epi.rois", v); });
    add("out_dir", [](const C& c) { return c.out_dir; }, [](C& c, const std::string& v) { c.out_dir = v; });
    add("report.timing", [](const C& c) { return std::string(c.timing ? "true" : "false"); },
        [](C& c, const std::string& v) { c.timing = parse_bool("report.timing", v); });
#undef MFD_DOUBLE
#undef MFD_SIZE
    return t;
  }();
  return table;
}

}  // namespace detail

/// Sets one key; unknown keys are rejected.
inline void set_config_value(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& [k, f] : detail::fields())
    if (k == key) {
      f.set(cfg, detail::trim(value));
      return;
    }
  throw InvalidArgument("config: unknown key '" + key + "'");
}

inline std::string get_config_value(const PipelineConfig& cfg, const std::string& key) {
  for (const auto& [k, f] : detail::fields())
    if (k == key) return f.get(cfg);
  throw InvalidArgument("config: unknown key '" + key + "'");
}

/// Parses "key = value" lines; '#' starts a comment.
inline void apply_config_text(PipelineConfig& cfg, const std::string& text) {
  std::stringstream ss(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidArgument("config line " + std::to_string(lineno) + ": expected key = value");
    set_config_value(cfg, detail::trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

inline void apply_config_file(PipelineConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

inline std::string print_config(const PipelineConfig& cfg) {
  std::string s;
  for (const auto& [k, f] : detail::fields()) s += k + " = " + f.get(cfg) + "\n";
  return s;
}

}  // namespace mfd
