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
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfd/denoise.hpp"
#include "mfd/image.hpp"
#include "mfd/metrics.hpp"
#include "mfd/msne.hpp"

namespace mfd {

struct MadsConfig {
  double beta2 = 0.0;
  /// Weight on the current gradient in the two-term gradient average.
  double grad_avg_weight = 0.7;
  std::size_t max_iters = 5000;
  double tol = 1e-10;
  DenoiserConfig denoiser{};
  std::size_t max_halvings = 60;
  double descent_slack = 1e-12;

  void validate() const {
    if (!(beta2 >= 0.0) || !std::isfinite(beta2)) throw InvalidArgument("MadsConfig: beta2 must be >= 0");
    if (!(grad_avg_weight > 0.0 && grad_avg_weight <= 1.0))
      throw InvalidArgument("MadsConfig: grad_avg_weight must lie in (0, 1]");
    if (max_iters < 1) throw InvalidArgument("MadsConfig: max_iters must be >= 1");
    if (!(tol >= 0.0)) throw InvalidArgument("MadsConfig: tol must be >= 0");
    if (!(descent_slack >= 0.0)) throw InvalidArgument("MadsConfig: descent_slack must be >= 0");
    denoiser.validate();
  }
};

struct SncField {
  std::vector<Image> G;
  /// J' at the start (entry 0) and after every accepted iteration.
  std::vector<double> cost_trace;
  std::vector<double> step_trace;
  std::size_t iterations_used = 0;
  std::size_t halving_iterations = 0;
  std::size_t halvings = 0;
  std::size_t sign_flips = 0;
  /// Iterations where the averaged direction gave no descent and the raw
  /// gradient was used instead.
  std::size_t raw_fallbacks = 0;
  bool converged = false;
  std::string stop_reason;
};

namespace detail {
inline void check_pair(std::span<const Image> U, std::span<const Image> G, const char* who) {
  if (U.size() != G.size() || U.empty()) throw InvalidArgument(std::string(who) + ": field count mismatch");
  for (std::size_t k = 0; k < U.size(); ++k)
    if (!U[k].same_shape(G[k]) || !U[k].same_shape(U[0]))
      throw InvalidArgument(std::string(who) + ": field shape mismatch");
}
}  // namespace detail

/// J' = ||U .* G - D||_F^2 + beta2 ||G||_F^2, D all ones.
inline double snc_cost(std::span<const Image> U, std::span<const Image> G, double beta2) {
  detail::check_pair(U, G, "snc_cost");
  double J = 0.0;
  for (std::size_t k = 0; k < U.size(); ++k)
    for (std::size_t x = 0; x < U[k].size(); ++x) {
      const double e = U[k][x] * G[k][x] - 1.0;
      J += e * e + beta2 * G[k][x] * G[k][x];
    }
  return J;
}

/// 2 (U .* G - D) .* U + 2 beta2 G.
inline std::vector<Image> snc_gradient(std::span<const Image> U, std::span<const Image> G, double beta2) {
  detail::check_pair(U, G, "snc_gradient");
  std::vector<Image> g;
  g.reserve(U.size());
  for (std::size_t k = 0; k < U.size(); ++k)
    g.push_back(zip(U[k], G[k], [beta2](double u, double gg) { return 2.0 * (u * gg - 1.0) * u + 2.0 * beta2 * gg; }));
  return g;
}

/// Global rescale of all fields so their overall mean is 1.
inline std::vector<Image> natural_scale(std::span<const Image> fields) {
  double s = 0.0, n = 0.0;
  for (const auto& f : fields) s += sum(f), n += static_cast<double>(f.size());
  if (s == 0.0 || !std::isfinite(s)) throw InvalidArgument("natural_scale: fields have zero mean");
  const double c = n / s;
  std::vector<Image> out;
  out.reserve(fields.size());
  for (const auto& f : fields) out.push_back(map(f, [c](double v) { return c * v; }));
  return out;
}

/// G <- G - mu d with d the averaged gradient alpha g(q) + (1 - alpha) g(q-1)
/// and mu = sum(G .* d) / sum(d .* d), halved until J' does not increase.
/// J' is quadratic, so every trial step is evaluated in closed form.
inline SncField estimate_snc(std::span<const Image> U, const MadsConfig& cfg) {
  cfg.validate();
  if (U.empty()) throw InvalidArgument("estimate_snc: no fields");
  for (const auto& f : U) {
    if (!f.same_shape(U[0])) throw InvalidArgument("estimate_snc: field shape mismatch");
    f.validate();
  }
  const std::size_t p = U.size(), n = U[0].size();
  const double a = cfg.grad_avg_weight;
  SncField out;
  std::vector<Image> G(p, Image(U[0].rows(), U[0].cols(), Domain::estimate, 1.0));
  double J = snc_cost(U, G, cfg.beta2);
  out.cost_trace.push_back(J);
  out.stop_reason = "max_iters";
  std::vector<Image> prev;

  // J'(G - mu d) = J'(G) - mu <grad, d> + mu^2 sum (U^2 + beta2) d^2.
  auto try_direction = [&](const std::vector<Image>& grad, const std::vector<Image>& d, double& mu_out,
                           std::size_t& halved, bool& flipped) -> bool {
    double gd = 0.0, dd = 0.0, curv = 0.0, Gd = 0.0;
    for (std::size_t k = 0; k < p; ++k)
      for (std::size_t x = 0; x < n; ++x) {
        const double dv = d[k][x];
        gd += grad[k][x] * dv;
        dd += dv * dv;
        Gd += G[k][x] * dv;
        curv += (U[k][x] * U[k][x] + cfg.beta2) * dv * dv;
      }
    if (dd == 0.0) return false;
    double mu = Gd / dd;
    flipped = !(mu > 0.0);
    if (flipped) mu = std::abs(mu);
    if (!std::isfinite(mu)) return false;
    for (halved = 0; halved <= cfg.max_halvings; ++halved, mu *= 0.5)
      if (-mu * gd + mu * mu * curv <= cfg.descent_slack) {
        mu_out = mu;
        return true;
      }
    return false;
  };

  for (std::size_t q = 1; q <= cfg.max_iters; ++q) {
    auto grad = snc_gradient(U, G, cfg.beta2);
    double gnorm = 0.0;
    for (const auto& g : grad) gnorm += dot(g, g);
    if (gnorm == 0.0) {
      out.converged = true;
      out.stop_reason = "zero_gradient";
      break;
    }
    std::vector<Image> d = grad;
    if (!prev.empty() && a < 1.0)
      for (std::size_t k = 0; k < p; ++k)
        for (std::size_t x = 0; x < n; ++x) d[k][x] = a * grad[k][x] + (1.0 - a) * prev[k][x];
    double mu = 0.0;
    std::size_t halved = 0;
    bool flipped = false;
    bool ok = try_direction(grad, d, mu, halved, flipped);
    if (!ok) {
      d = grad;
      ok = try_direction(grad, d, mu, halved, flipped);
      if (ok) ++out.raw_fallbacks;
    }
    if (!ok) {
      out.converged = true;
      out.stop_reason = "no_descent";
      break;
    }
    if (flipped) ++out.sign_flips;
    if (halved > 0) ++out.halving_iterations, out.halvings += halved;
    for (std::size_t k = 0; k < p; ++k)
      for (std::size_t x = 0; x < n; ++x) G[k][x] -= mu * d[k][x];
    const double Jn = snc_cost(U, G, cfg.beta2);
    if (!std::isfinite(Jn)) throw DivergenceError("estimate_snc: non-finite cost", q);
    out.cost_trace.push_back(Jn);
    out.step_trace.push_back(mu);
    out.iterations_used = q;
    prev = std::move(grad);
    const double change = std::abs(J - Jn);
    const double ref = J;
    J = Jn;
    if (change <= cfg.tol * ref) {
      out.converged = true;
      out.stop_reason = "tol";
      break;
    }
  }
  out.G = std::move(G);
  return out;
}

/// (1/p) sum_i H_i .* G_i.
inline Image combine_frames(const FrameStack& stack, std::span<const Image> G) {
  if (G.size() != stack.size()) throw InvalidArgument("combine_frames: field count mismatch");
  Image out(stack.rows(), stack.cols(), Domain::estimate);
  for (std::size_t k = 0; k < stack.size(); ++k) {
    if (!stack.same_shape(G[k])) throw InvalidArgument("combine_frames: field shape mismatch");
    for (std::size_t x = 0; x < out.size(); ++x) out[x] += stack[k][x] * G[k][x];
  }
  const double inv = 1.0 / static_cast<double>(stack.size());
  for (auto& v : out.values()) v *= inv;
  return out;
}

/// Average, then denoise, then one global scalar so the output mean equals
/// the mean of the stack's temporal-mean image.
inline Image despeckle(const FrameStack& stack, const SncField& snc, const MadsConfig& cfg) {
  Image avg = apply_denoiser(combine_frames(stack, snc.G), cfg.denoiser);
  const double target = mean(stack.temporal_mean());
  const double m = mean(avg);
  if (m == 0.0 || !std::isfinite(m)) throw InvalidArgument("despeckle: estimate has zero mean; scale undefined");
  const double c = target / m;
  for (auto& v : avg.values()) v *= c;
  return avg;
}

struct PipelineReport {
  std::optional<double> npm_db, snr_db, psnr_db, ssim, epi;
  double runtime_msne_s = 0.0, runtime_snc_s = 0.0, runtime_total_s = 0.0;
  std::size_t msne_iterations = 0, snc_iterations = 0;
  double msne_halving_rate = 0.0;
};

struct MadsResult {
  Image image;
  SpeckleEstimate speckle;
  SncField snc;
  PipelineReport report;
};

struct PipelineReference {
  const Image* clean = nullptr;
  const FrameStack* true_speckle = nullptr;
  std::span<const metrics::Roi> rois{};
  metrics::SsimParams ssim{};
};

/// Speckle estimation, natural rescale, SNC estimation, despeckling.
inline MadsResult mads_pipeline(const FrameStack& stack, const MsneConfig& msne_cfg, const MadsConfig& mads_cfg,
                                const PipelineReference& ref = {}) {
  using clock = std::chrono::steady_clock;
  const auto t0 = clock::now();
  auto speckle = estimate_speckle(stack, msne_cfg, ref.true_speckle);
  const auto t1 = clock::now();
  auto snc = estimate_snc(natural_scale(speckle.fields), mads_cfg);
  Image img = despeckle(stack, snc, mads_cfg);
  const auto t2 = clock::now();
  PipelineReport rep;
  rep.runtime_msne_s = std::chrono::duration<double>(t1 - t0).count();
  rep.runtime_snc_s = std::chrono::duration<double>(t2 - t1).count();
  rep.runtime_total_s = std::chrono::duration<double>(t2 - t0).count();
  rep.msne_iterations = speckle.iterations_used;
  rep.snc_iterations = snc.iterations_used;
  rep.msne_halving_rate = speckle.halving_rate();
  if (ref.true_speckle) rep.npm_db = metrics::npm(ref.true_speckle->frames(), speckle.fields);
  if (ref.clean) {
    const auto m = metrics::evaluate(*ref.clean, img, ref.rois, ref.ssim);
    rep.snr_db = m.snr_db;
    rep.psnr_db = m.psnr_db;
    rep.ssim = m.ssim;
    rep.epi = m.epi;
  }
  return {std::move(img), std::move(speckle), std::move(snc), rep};
}

}  // namespace mfd
