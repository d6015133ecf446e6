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
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfd/image.hpp"

namespace mfd::metrics {

/// Cap for "infinite" dB values; NPM is floored at the negative.
inline constexpr double kDbLimit = 300.0;

inline double clamp_db(double db) {
  if (std::isnan(db)) return db;
  return std::clamp(db, -kDbLimit, kDbLimit);
}

inline double squared_error(const Image& ref, const Image& test) {
  if (!ref.same_shape(test)) throw InvalidArgument("metrics: shape mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const double d = ref[i] - test[i];
    s += d * d;
  }
  return s;
}

/// 10 log10(sum ref^2 / sum (ref - test)^2). Asymmetric in (ref, test).
inline double snr(const Image& ref, const Image& test) {
  const double err = squared_error(ref, test);
  if (err == 0.0) return kDbLimit;
  return clamp_db(10.0 * std::log10(dot(ref, ref) / err));
}

/// 10 log10(max(ref)^2 MN / sum (ref - test)^2).
inline double psnr(const Image& ref, const Image& test) {
  const double err = squared_error(ref, test);
  if (err == 0.0) return kDbLimit;
  const double peak = max_value(ref);
  return clamp_db(10.0 * std::log10(peak * peak * static_cast<double>(ref.size()) / err));
}

struct SsimParams {
  std::size_t window = 8;
  double k1 = 0.01;
  double k2 = 0.03;
  /// Dynamic range L of the pixel values.
  double dynamic_range = 1.0;
};

/// Mean SSIM over every fully contained window x window block; uniform
/// weights, population moments. Summed-area tables keep it O(MN).
inline double ssim(const Image& ref, const Image& test, const SsimParams& prm = {}) {
  if (!ref.same_shape(test)) throw InvalidArgument("ssim: shape mismatch");
  const std::size_t w = prm.window, M = ref.rows(), N = ref.cols();
  if (w < 1 || w > M || w > N) throw InvalidArgument("ssim: window larger than image");
  const double c1 = (prm.k1 * prm.dynamic_range) * (prm.k1 * prm.dynamic_range);
  const double c2 = (prm.k2 * prm.dynamic_range) * (prm.k2 * prm.dynamic_range);
  // Five integral images of x, y, x^2, y^2, xy with a zero border row/col.
  const std::size_t W = N + 1;
  std::vector<double> ix((M + 1) * W), iy(ix.size()), ixx(ix.size()), iyy(ix.size()), ixy(ix.size());
  for (std::size_t r = 0; r < M; ++r)
    for (std::size_t c = 0; c < N; ++c) {
      const double x = ref(r, c), y = test(r, c);
      const std::size_t k = (r + 1) * W + (c + 1), up = r * W + (c + 1), lf = (r + 1) * W + c, ul = r * W + c;
      ix[k] = x + ix[up] + ix[lf] - ix[ul];
      iy[k] = y + iy[up] + iy[lf] - iy[ul];
      ixx[k] = x * x + ixx[up] + ixx[lf] - ixx[ul];
      iyy[k] = y * y + iyy[up] + iyy[lf] - iyy[ul];
      ixy[k] = x * y + ixy[up] + ixy[lf] - ixy[ul];
    }
  auto box = [&](const std::vector<double>& t, std::size_t r, std::size_t c) {
    return t[(r + w) * W + (c + w)] - t[r * W + (c + w)] - t[(r + w) * W + c] + t[r * W + c];
  };
  const double n = static_cast<double>(w * w);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t r = 0; r + w <= M; ++r)
    for (std::size_t c = 0; c + w <= N; ++c) {
      const double mx = box(ix, r, c) / n, my = box(iy, r, c) / n;
      const double vx = std::max(0.0, box(ixx, r, c) / n - mx * mx);
      const double vy = std::max(0.0, box(iyy, r, c) / n - my * my);
      const double cxy = box(ixy, r, c) / n - mx * my;
      acc += ((2.0 * mx * my + c1) * (2.0 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  return acc / static_cast<double>(count);
}

struct Roi {
  std::size_t row = 0, col = 0, height = 0, width = 0;
};

/// 4-neighbour Laplacian at an interior pixel.
inline double laplacian_at(const Image& img, std::size_t r, std::size_t c) {
  return img(r - 1, c) + img(r + 1, c) + img(r, c - 1) + img(r, c + 1) - 4.0 * img(r, c);
}

/// Pearson correlation of the Laplacians of ref and test inside one ROI.
/// Pixels on the image border are excluded. nullopt when either side is flat.
inline std::optional<double> epi_roi(const Image& ref, const Image& test, const Roi& roi) {
  if (roi.height == 0 || roi.width == 0 || roi.row + roi.height > ref.rows() || roi.col + roi.width > ref.cols())
    throw InvalidArgument("epi: ROI out of bounds");
  std::vector<double> a, b;
  for (std::size_t r = std::max<std::size_t>(roi.row, 1); r < std::min(roi.row + roi.height, ref.rows() - 1); ++r)
    for (std::size_t c = std::max<std::size_t>(roi.col, 1); c < std::min(roi.col + roi.width, ref.cols() - 1); ++c) {
      a.push_back(laplacian_at(ref, r, c));
      b.push_back(laplacian_at(test, r, c));
    }
  if (a.size() < 2) return std::nullopt;
  const double n = static_cast<double>(a.size());
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) ma += a[i], mb += b[i];
  ma /= n, mb /= n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma, db = b[i] - mb;
    sab += da * db, saa += da * da, sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return sab / std::sqrt(saa * sbb);
}

struct EpiResult {
  double value;
  std::size_t used_rois;
  std::size_t skipped_rois;
};

inline EpiResult epi_detailed(const Image& ref, const Image& test, std::span<const Roi> rois) {
  if (!ref.same_shape(test)) throw InvalidArgument("epi: shape mismatch");
  if (rois.empty()) throw InvalidArgument("epi: no ROIs");
  double acc = 0.0;
  std::size_t used = 0;
  for (const auto& roi : rois)
    if (auto v = epi_roi(ref, test, roi)) acc += *v, ++used;
  if (used == 0) throw InvalidArgument("epi: every ROI is flat; index undefined");
  return {acc / static_cast<double>(used), used, rois.size() - used};
}

inline double epi(const Image& ref, const Image& test, std::span<const Roi> rois) {
  return epi_detailed(ref, test, rois).value;
}

/// NPM of an estimate against truth, both flattened to one vector.
inline double npm(std::span<const double> truth, std::span<const double> est) {
  if (truth.size() != est.size()) throw InvalidArgument("npm: length mismatch");
  double ue = 0.0, ee = 0.0, uu = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    ue += truth[i] * est[i];
    ee += est[i] * est[i];
    uu += truth[i] * truth[i];
  }
  if (ee == 0.0) throw InvalidArgument("npm: zero estimate vector");
  if (uu == 0.0) throw InvalidArgument("npm: zero truth vector");
  const double a = ue / ee;
  double rr = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const double d = truth[i] - a * est[i];
    rr += d * d;
  }
  if (rr <= 0.0) return -kDbLimit;
  return clamp_db(20.0 * std::log10(std::sqrt(rr / uu)));
}

inline std::vector<double> flatten(std::span<const Image> fields) {
  std::vector<double> out;
  for (const auto& f : fields) out.insert(out.end(), f.values().begin(), f.values().end());
  return out;
}

inline double npm(std::span<const Image> truth, std::span<const Image> est) {
  if (truth.size() != est.size()) throw InvalidArgument("npm: field count mismatch");
  for (std::size_t k = 0; k < truth.size(); ++k)
    if (!truth[k].same_shape(est[k])) throw InvalidArgument("npm: field shape mismatch");
  return npm(flatten(truth), flatten(est));
}

/// Mean over all 2N-1 lags of the squared cross-correlation of the
/// zero-mean, unit-norm versions of two equal-length lines.
inline double correlation_energy(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidArgument("correlation_energy: length mismatch");
  if (a.size() < 8) throw InvalidArgument("correlation_energy: lines must have length >= 8");
  auto normalize = [](std::span<const double> x) {
    double m = 0.0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    std::vector<double> y(x.size());
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - m, s += y[i] * y[i];
    if (!(s > 0.0)) throw InvalidArgument("correlation_energy: zero-variance line");
    const double inv = 1.0 / std::sqrt(s);
    for (auto& v : y) v *= inv;
    return y;
  };
  const auto x = normalize(a), y = normalize(b);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
  double acc = 0.0;
  for (std::ptrdiff_t lag = -(n - 1); lag <= n - 1; ++lag) {
    double r = 0.0;
    for (std::ptrdiff_t i = std::max<std::ptrdiff_t>(0, -lag); i < std::min(n, n - lag); ++i) r += x[i] * y[i + lag];
    acc += r * r;
  }
  return acc / static_cast<double>(2 * n - 1);
}

/// Mean correlation energy of adjacent columns (axial) or adjacent rows
/// (lateral) of an image. Pairs involving a constant line, such as the
/// zero padding left by block deconvolution, are skipped.
inline double mean_adjacent_correlation_energy(const Image& img, bool axial) {
  auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
  };
  double acc = 0.0;
  std::size_t count = 0;
  const std::size_t lines = axial ? img.cols() : img.rows();
  for (std::size_t i = 0; i + 1 < lines; ++i) {
    const std::vector<double> a = axial ? img.column(i) : std::vector<double>(img.row(i).begin(), img.row(i).end());
    const std::vector<double> b =
        axial ? img.column(i + 1) : std::vector<double>(img.row(i + 1).begin(), img.row(i + 1).end());
    if (constant(a) || constant(b)) continue;
    acc += correlation_energy(a, b);
    ++count;
  }
  if (count == 0) throw InvalidArgument("mean_adjacent_correlation_energy: need two non-constant adjacent lines");
  return acc / static_cast<double>(count);
}

struct MetricReport {
  std::optional<double> snr_db, psnr_db, ssim, epi, npm_db;
  std::vector<Roi> rois;
};

/// Every reference-based index that the inputs allow.
inline MetricReport evaluate(const Image& ref, const Image& test, std::span<const Roi> rois,
                             const SsimParams& sp = {}) {
  MetricReport rep;
  rep.snr_db = snr(ref, test);
  rep.psnr_db = psnr(ref, test);
  if (sp.window <= ref.rows() && sp.window <= ref.cols()) rep.ssim = ssim(ref, test, sp);
  if (!rois.empty()) {
    rep.rois.assign(rois.begin(), rois.end());
    try {
      rep.epi = epi(ref, test, rois);
    } catch (const InvalidArgument&) {
      rep.epi.reset();
    }
  }
  return rep;
}

}  // namespace mfd::metrics
