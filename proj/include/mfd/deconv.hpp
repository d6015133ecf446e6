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

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfd/fft.hpp"
#include "mfd/image.hpp"
#include "mfd/metrics.hpp"

namespace mfd {

enum class Direction { axial, lateral };

struct Psf1D {
  std::vector<double> taps;
  Direction direction = Direction::axial;

  std::size_t length() const noexcept { return taps.size(); }
};

/// B contiguous blocks of length ceil(L/B); the last one is zero-padded.
struct BlockPlan {
  std::size_t blocks = 1;
  std::size_t block_length = 0;
  std::size_t signal_length = 0;
  Direction direction = Direction::axial;

  static BlockPlan make(std::size_t signal_length, std::size_t blocks, Direction d) {
    if (blocks < 1) throw InvalidArgument("BlockPlan: block count must be >= 1");
    if (signal_length < blocks) throw InvalidArgument("BlockPlan: more blocks than samples");
    return {blocks, (signal_length + blocks - 1) / blocks, signal_length, d};
  }

  std::size_t begin(std::size_t b) const noexcept { return b * block_length; }
};

struct DeconvConfig {
  std::size_t max_iters = 2000;
  /// Stop when |J(q) - J(q+1)| <= tol * J(q).
  double tol = 1e-8;
  std::size_t blocks_axial = 2;
  std::size_t blocks_lateral = 1;
  /// PSF support assumed by the estimator. Each block's TRF estimate has
  /// length block_length - psf_length + 1; a length of 1 means "no blur".
  std::size_t psf_length_axial = 8;
  std::size_t psf_length_lateral = 4;
  /// Frequency-domain preconditioner 1/(P + delta mean(P)); 0 disables it.
  double precond_delta = 1e-3;
  /// Recompute R x from scratch every this many iterations.
  std::size_t refresh_every = 25;
  /// Accepted Ritz values may exceed the previous cost by at most this.
  double descent_slack = 1e-12;

  void validate() const {
    if (max_iters < 1) throw InvalidArgument("DeconvConfig: max_iters must be >= 1");
    if (!(tol >= 0.0)) throw InvalidArgument("DeconvConfig: tol must be >= 0");
    if (blocks_axial < 1 || blocks_lateral < 1) throw InvalidArgument("DeconvConfig: block counts must be >= 1");
    if (psf_length_axial < 1 || psf_length_lateral < 1)
      throw InvalidArgument("DeconvConfig: PSF lengths must be >= 1");
    if (!(precond_delta >= 0.0)) throw InvalidArgument("DeconvConfig: precond_delta must be >= 0");
    if (refresh_every < 1) throw InvalidArgument("DeconvConfig: refresh_every must be >= 1");
  }
};

struct TrfEstimate {
  /// Per-channel estimates, each of the input signal length.
  std::vector<std::vector<double>> channels;
  /// Least-squares PSF fitted to the estimate, unit norm.
  Psf1D psf;
  std::vector<double> cost_trace;
  std::vector<double> npm_trace;
  /// Frobenius norm of the stacked estimate after each iteration.
  std::vector<double> norm_trace;
  std::size_t iterations = 0;
  std::size_t rejected_steps = 0;
  bool converged = false;
};

namespace detail {

/// One SIMO block: C channels of length L, estimates of length T.
/// J(v) = sum_{i<j} ||x_i * v_j - x_j * v_i||^2 = v' R v with
/// (R v)_k = IFFT(P V_k - X_k sum_i conj(X_i) V_i)[0:T], P = sum |X_i|^2.
class CrossRelationBlock {
 public:
  CrossRelationBlock(std::vector<std::vector<double>> x, std::size_t est_len, double precond_delta)
      : x_(std::move(x)), C_(x_.size()), L_(x_.front().size()), T_(est_len),
        nfft_(fft::next_pow2(L_ + T_ - 1)), plan_(nfft_), X_(C_), P_(nfft_, 0.0), buf_(nfft_) {
    for (std::size_t i = 0; i < C_; ++i) {
      X_[i] = plan_.forward_real(x_[i]);
      for (std::size_t f = 0; f < nfft_; ++f) P_[f] += std::norm(X_[i][f]);
    }
    const double meanP = std::accumulate(P_.begin(), P_.end(), 0.0) / static_cast<double>(nfft_);
    energy_ = 0.0;
    for (const auto& ch : x_)
      for (double v : ch) energy_ += v * v;
    precond_.assign(nfft_, 1.0);
    if (precond_delta > 0.0 && meanP > 0.0)
      for (std::size_t f = 0; f < nfft_; ++f) precond_[f] = meanP / (P_[f] + precond_delta * meanP);
  }

  std::size_t channels() const noexcept { return C_; }
  std::size_t est_len() const noexcept { return T_; }
  std::size_t dim() const noexcept { return C_ * T_; }
  double energy() const noexcept { return energy_; }
  const std::vector<std::vector<double>>& data() const noexcept { return x_; }

  Eigen::VectorXd apply(const Eigen::VectorXd& v) {
    std::vector<std::vector<fft::cplx>> V(C_);
    std::vector<fft::cplx> Csum(nfft_, fft::cplx{0.0, 0.0});
    for (std::size_t i = 0; i < C_; ++i) {
      V[i] = plan_.forward_real(std::span<const double>(v.data() + i * T_, T_));
      for (std::size_t f = 0; f < nfft_; ++f) Csum[f] += std::conj(X_[i][f]) * V[i][f];
    }
    Eigen::VectorXd out(dim());
    const double inv = 1.0 / static_cast<double>(nfft_);
    for (std::size_t k = 0; k < C_; ++k) {
      for (std::size_t f = 0; f < nfft_; ++f) buf_[f] = P_[f] * V[k][f] - X_[k][f] * Csum[f];
      plan_.inverse(buf_);
      for (std::size_t t = 0; t < T_; ++t) out[static_cast<Eigen::Index>(k * T_ + t)] = buf_[t].real() * inv;
    }
    return out;
  }

  Eigen::VectorXd precondition(const Eigen::VectorXd& r) {
    Eigen::VectorXd out(dim());
    const double inv = 1.0 / static_cast<double>(nfft_);
    for (std::size_t k = 0; k < C_; ++k) {
      auto R = plan_.forward_real(std::span<const double>(r.data() + k * T_, T_));
      for (std::size_t f = 0; f < nfft_; ++f) buf_[f] = R[f] * precond_[f];
      plan_.inverse(buf_);
      for (std::size_t t = 0; t < T_; ++t) out[static_cast<Eigen::Index>(k * T_ + t)] = buf_[t].real() * inv;
    }
    return out;
  }

 private:
  std::vector<std::vector<double>> x_;
  std::size_t C_, L_, T_, nfft_;
  fft::ComplexFft plan_;
  std::vector<std::vector<fft::cplx>> X_;
  std::vector<double> P_;
  std::vector<double> precond_;
  std::vector<fft::cplx> buf_;
  double energy_ = 0.0;
};

/// Locally optimal block-free Rayleigh-Ritz iteration on span{x, M^-1 r, p}.
/// The Ritz value never exceeds x'Rx because x is in the trial space.
class RitzSolver {
 public:
  RitzSolver(CrossRelationBlock& blk, bool precondition) : blk_(blk), precondition_(precondition) {
    // Flat spectrum start: a unit impulse per channel.
    x_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(blk.dim()));
    for (std::size_t k = 0; k < blk.channels(); ++k) x_[static_cast<Eigen::Index>(k * blk.est_len())] = 1.0;
    x_.normalize();
    refresh();
  }

  double cost() const noexcept { return lambda_; }
  const Eigen::VectorXd& x() const noexcept { return x_; }

  void refresh() {
    x_.normalize();
    Rx_ = blk_.apply(x_);
    lambda_ = x_.dot(Rx_);
    if (p_.size() > 0) {
      const double n = p_.norm();
      if (n > 0.0) {
        p_ /= n;
        Rp_ = blk_.apply(p_);
      } else {
        p_.resize(0);
      }
    }
  }

  /// One iteration. Returns false when the step was rejected.
  bool step(double slack) {
    Eigen::VectorXd r = Rx_ - lambda_ * x_;
    if (r.norm() == 0.0) return true;
    Eigen::VectorXd w = precondition_ ? blk_.precondition(r) : r;
    std::vector<Eigen::VectorXd> Q{x_}, RQ{Rx_};
    auto add = [&](Eigen::VectorXd v, Eigen::VectorXd Rv) {
      const double n0 = v.norm();
      if (n0 == 0.0) return;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t j = 0; j < Q.size(); ++j) {
          const double c = Q[j].dot(v);
          v -= c * Q[j];
          Rv -= c * RQ[j];
        }
      const double n = v.norm();
      if (n <= 1e-10 * n0) return;
      Q.push_back(v / n);
      RQ.push_back(Rv / n);
    };
    add(w, blk_.apply(w));
    if (p_.size() > 0) add(p_, Rp_);
    const auto k = static_cast<Eigen::Index>(Q.size());
    Eigen::MatrixXd G(k, k);
    for (Eigen::Index a = 0; a < k; ++a)
      for (Eigen::Index b = 0; b <= a; ++b) G(a, b) = G(b, a) = 0.5 * (Q[a].dot(RQ[b]) + Q[b].dot(RQ[a]));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    const Eigen::VectorXd c = es.eigenvectors().col(0);
    const double ritz = es.eigenvalues()[0];
    if (!(ritz <= lambda_ + slack)) {
      p_.resize(0);
      return false;
    }
    Eigen::VectorXd xn = c[0] * Q[0], Rxn = c[0] * RQ[0];
    Eigen::VectorXd pn = Eigen::VectorXd::Zero(x_.size()), Rpn = pn;
    for (Eigen::Index a = 1; a < k; ++a) {
      pn += c[a] * Q[a];
      Rpn += c[a] * RQ[a];
    }
    xn += pn;
    Rxn += Rpn;
    const double n = xn.norm();
    x_ = xn / n;
    Rx_ = Rxn / n;
    lambda_ = x_.dot(Rx_);
    p_ = pn;
    Rp_ = Rpn;
    const double pnorm = p_.norm();
    if (pnorm > 0.0) {
      p_ /= pnorm;
      Rp_ /= pnorm;
    } else {
      p_.resize(0);
    }
    return true;
  }

 private:
  CrossRelationBlock& blk_;
  bool precondition_;
  Eigen::VectorXd x_, Rx_, p_, Rp_;
  double lambda_ = 0.0;
};

inline void require_channels(std::span<const std::vector<double>> channels, const char* who) {
  if (channels.size() < 2) throw InvalidArgument(std::string(who) + ": at least 2 channels required");
  const std::size_t L = channels.front().size();
  if (L == 0) throw InvalidArgument(std::string(who) + ": empty channel");
  for (const auto& ch : channels) {
    if (ch.size() != L) throw InvalidArgument(std::string(who) + ": channel lengths differ");
    bool any = false;
    for (double v : ch) {
      if (!std::isfinite(v)) throw InvalidArgument(std::string(who) + ": non-finite sample");
      any = any || v != 0.0;
    }
    if (!any) throw InvalidArgument(std::string(who) + ": degenerate all-zero channel");
  }
}

/// Least-squares s minimizing sum_i ||h_i * s - x_i||^2, unit norm.
inline std::vector<double> fit_psf(std::span<const std::vector<double>> x, std::span<const std::vector<double>> h,
                                   std::size_t len) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(len), static_cast<Eigen::Index>(len));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(len));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto& hi = h[i];
    const auto& xi = x[i];
    const std::size_t T = hi.size();
    for (std::size_t a = 0; a < len; ++a) {
      for (std::size_t c = 0; c < len; ++c) {
        // sum_n h[n-a] h[n-c]
        double s = 0.0;
        const std::size_t lo = std::max(a, c);
        for (std::size_t n = lo; n < T + std::min(a, c); ++n) s += hi[n - a] * hi[n - c];
        A(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) += s;
      }
      double s = 0.0;
      for (std::size_t t = 0; t < T && t + a < xi.size(); ++t) s += hi[t] * xi[t + a];
      b[static_cast<Eigen::Index>(a)] += s;
    }
  }
  Eigen::VectorXd s = A.ldlt().solve(b);
  std::vector<double> out(s.data(), s.data() + s.size());
  double n = 0.0;
  for (double v : out) n += v * v;
  n = std::sqrt(n);
  if (n > 0.0 && std::isfinite(n))
    for (auto& v : out) v /= n;
  return out;
}

}  // namespace detail

/// Direct time-domain sum_{i<j} ||x_i * h_j - x_j * h_i||^2 with full
/// linear convolutions. O(C^2 L T); meant for checks on small problems.
inline double cross_relation_cost(std::span<const std::vector<double>> x, std::span<const std::vector<double>> h) {
  if (x.size() != h.size()) throw InvalidArgument("cross_relation_cost: channel count mismatch");
  auto conv = [](const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  };
  double J = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const auto a = conv(x[i], h[j]), b = conv(x[j], h[i]);
      for (std::size_t n = 0; n < a.size(); ++n) J += (a[n] - b[n]) * (a[n] - b[n]);
    }
  return J;
}

/// Blind multichannel TRF estimation on one set of lines. Blocks are
/// solved independently; block b is scaled to ||x^b|| / ||x|| so the
/// stacked estimate keeps unit norm. The sign of each block is fixed so
/// that its fitted PSF has a positive peak.
inline TrfEstimate bmcflms_pass(std::span<const std::vector<double>> channels, const BlockPlan& plan,
                                std::size_t psf_length, const DeconvConfig& cfg,
                                std::span<const std::vector<double>> truth = {}) {
  cfg.validate();
  detail::require_channels(channels, "bmcflms_pass");
  const std::size_t C = channels.size(), L = channels.front().size();
  if (plan.signal_length != L) throw InvalidArgument("bmcflms_pass: block plan does not match signal length");
  if (psf_length > plan.block_length)
    throw InvalidArgument("bmcflms_pass: PSF length exceeds block length");
  if (!truth.empty() && (truth.size() != C || truth.front().size() != L))
    throw InvalidArgument("bmcflms_pass: truth shape mismatch");
  const std::size_t T = plan.block_length - psf_length + 1;

  double total = 0.0;
  for (const auto& ch : channels)
    for (double v : ch) total += v * v;
  const double scale = 1.0 / std::sqrt(total);

  std::vector<std::unique_ptr<detail::CrossRelationBlock>> blocks;
  std::vector<std::unique_ptr<detail::RitzSolver>> solvers;
  std::vector<double> weight;
  for (std::size_t b = 0; b < plan.blocks; ++b) {
    std::vector<std::vector<double>> xb(C, std::vector<double>(plan.block_length, 0.0));
    for (std::size_t i = 0; i < C; ++i)
      for (std::size_t t = 0; t < plan.block_length && plan.begin(b) + t < L; ++t)
        xb[i][t] = channels[i][plan.begin(b) + t] * scale;
    blocks.push_back(std::make_unique<detail::CrossRelationBlock>(std::move(xb), T, cfg.precond_delta));
    weight.push_back(std::sqrt(blocks.back()->energy()));
    solvers.push_back(blocks.back()->energy() > 0.0
                          ? std::make_unique<detail::RitzSolver>(*blocks.back(), cfg.precond_delta > 0.0)
                          : nullptr);
  }

  TrfEstimate out;
  out.psf.direction = plan.direction;

  // Signs are fixed only at the end; the running NPM is sign-invariant.
  auto assemble = [&](bool fix_sign) {
    std::vector<std::vector<double>> est(C, std::vector<double>(L, 0.0));
    std::vector<double> psf_acc(psf_length, 0.0);
    for (std::size_t b = 0; b < plan.blocks; ++b) {
      if (!solvers[b]) continue;
      const auto& x = solvers[b]->x();
      double sign = 1.0;
      if (fix_sign) {
        std::vector<std::vector<double>> hb(C, std::vector<double>(T));
        for (std::size_t i = 0; i < C; ++i)
          for (std::size_t t = 0; t < T; ++t) hb[i][t] = x[static_cast<Eigen::Index>(i * T + t)];
        auto s = detail::fit_psf(blocks[b]->data(), hb, psf_length);
        const auto peak = std::max_element(s.begin(), s.end(), [](double a, double c) { return std::abs(a) < std::abs(c); });
        if (peak != s.end() && *peak < 0.0) sign = -1.0;
        for (std::size_t a = 0; a < psf_length; ++a) psf_acc[a] += sign * weight[b] * s[a];
      }
      for (std::size_t i = 0; i < C; ++i)
        for (std::size_t t = 0; t < T && plan.begin(b) + t < L; ++t)
          est[i][plan.begin(b) + t] = sign * weight[b] * x[static_cast<Eigen::Index>(i * T + t)];
    }
    if (fix_sign) {
      double n = 0.0;
      for (double v : psf_acc) n += v * v;
      n = std::sqrt(n);
      if (n > 0.0)
        for (auto& v : psf_acc) v /= n;
      out.psf.taps = std::move(psf_acc);
    }
    return est;
  };
  auto stacked_cost = [&]() {
    double J = 0.0;
    for (std::size_t b = 0; b < plan.blocks; ++b)
      if (solvers[b]) J += weight[b] * weight[b] * solvers[b]->cost();
    return J;
  };
  auto record = [&]() {
    out.cost_trace.push_back(stacked_cost());
    double n2 = 0.0;
    for (std::size_t b = 0; b < plan.blocks; ++b)
      if (solvers[b]) n2 += weight[b] * weight[b] * solvers[b]->x().squaredNorm();
    out.norm_trace.push_back(std::sqrt(n2));
    if (!truth.empty()) {
      const auto est = assemble(false);
      std::vector<double> a, e;
      for (std::size_t i = 0; i < C; ++i) {
        a.insert(a.end(), truth[i].begin(), truth[i].end());
        e.insert(e.end(), est[i].begin(), est[i].end());
      }
      out.npm_trace.push_back(metrics::npm(a, e));
    }
  };

  double prev = stacked_cost();
  for (std::size_t q = 1; q <= cfg.max_iters; ++q) {
    for (std::size_t b = 0; b < plan.blocks; ++b) {
      if (!solvers[b]) continue;
      if (q % cfg.refresh_every == 0) solvers[b]->refresh();
      if (!solvers[b]->step(cfg.descent_slack)) ++out.rejected_steps;
    }
    out.iterations = q;
    record();
    const double cur = out.cost_trace.back();
    if (!std::isfinite(cur)) throw DivergenceError("bmcflms_pass: non-finite cost", q);
    if (std::abs(prev - cur) <= cfg.tol * prev) {
      out.converged = true;
      break;
    }
    prev = cur;
  }
  out.channels = assemble(true);
  return out;
}

inline std::vector<std::vector<double>> columns_of(const Image& img) {
  std::vector<std::vector<double>> out(img.cols());
  for (std::size_t c = 0; c < img.cols(); ++c) out[c] = img.column(c);
  return out;
}

inline std::vector<std::vector<double>> rows_of(const Image& img) {
  std::vector<std::vector<double>> out(img.rows());
  for (std::size_t r = 0; r < img.rows(); ++r) out[r].assign(img.row(r).begin(), img.row(r).end());
  return out;
}

/// Axial pass: A-lines (columns) are the channels.
inline TrfEstimate deconvolve_axial_detailed(const Image& rf, const DeconvConfig& cfg) {
  const auto cols = columns_of(rf);
  return bmcflms_pass(cols, BlockPlan::make(rf.rows(), cfg.blocks_axial, Direction::axial), cfg.psf_length_axial, cfg);
}

inline Image deconvolve_axial(const Image& rf, const DeconvConfig& cfg) {
  const auto est = deconvolve_axial_detailed(rf, cfg);
  Image out(rf.rows(), rf.cols(), Domain::rf);
  for (std::size_t c = 0; c < rf.cols(); ++c) out.set_column(c, est.channels[c]);
  return out;
}

/// Lateral pass: rows are the channels. All-zero rows are left at zero.
inline TrfEstimate deconvolve_lateral_detailed(const Image& img, const DeconvConfig& cfg,
                                               std::vector<std::size_t>* used_rows = nullptr) {
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> idx;
  for (std::size_t r = 0; r < img.rows(); ++r) {
    const auto row = img.row(r);
    if (std::any_of(row.begin(), row.end(), [](double v) { return v != 0.0; })) {
      rows.emplace_back(row.begin(), row.end());
      idx.push_back(r);
    }
  }
  auto est = bmcflms_pass(rows, BlockPlan::make(img.cols(), cfg.blocks_lateral, Direction::lateral),
                          cfg.psf_length_lateral, cfg);
  if (used_rows) *used_rows = std::move(idx);
  return est;
}

inline Image deconvolve_lateral(const Image& img, const DeconvConfig& cfg) {
  std::vector<std::size_t> idx;
  const auto est = deconvolve_lateral_detailed(img, cfg, &idx);
  Image out(img.rows(), img.cols(), Domain::rf);
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t c = 0; c < img.cols(); ++c) out(idx[i], c) = est.channels[i][c];
  return out;
}

/// Axial pass over the RF image, then lateral pass over its output.
inline Image deconvolve_2d(const Image& rf, const DeconvConfig& cfg) {
  return deconvolve_lateral(deconvolve_axial(rf, cfg), cfg);
}

/// Homomorphic deconvolution. The PSF spectrum is the minimum-phase
/// reconstruction of the liftered, column-averaged log magnitude; each
/// column is then Wiener-filtered with that spectrum.
inline Image cepstrum_deconvolve(const Image& rf, std::size_t lifter_cutoff, double noise_floor) {
  rf.validate();
  const std::size_t M = rf.rows();
  if (lifter_cutoff < 1 || lifter_cutoff >= M)
    throw InvalidArgument("cepstrum_deconvolve: lifter cutoff must lie in [1, column length)");
  if (!(noise_floor > 0.0)) throw InvalidArgument("cepstrum_deconvolve: noise_floor must be > 0");
  const std::size_t n = 2 * M;
  fft::ComplexFft plan(n);
  std::vector<std::vector<fft::cplx>> spectra(rf.cols());
  std::vector<double> logmag(n, 0.0);
  double peak_power = 0.0;
  for (std::size_t c = 0; c < rf.cols(); ++c) {
    spectra[c] = plan.forward_real(rf.column(c));
    for (const auto& z : spectra[c]) peak_power = std::max(peak_power, std::norm(z));
  }
  if (!(peak_power > 0.0)) throw InvalidArgument("cepstrum_deconvolve: all-zero input");
  const double tiny = 1e-300 + 1e-12 * std::sqrt(peak_power);
  for (const auto& S : spectra)
    for (std::size_t f = 0; f < n; ++f) logmag[f] += std::log(std::abs(S[f]) + tiny);
  for (auto& v : logmag) v /= static_cast<double>(rf.cols());

  std::vector<fft::cplx> cep(logmag.begin(), logmag.end());
  plan.inverse(cep);
  for (auto& z : cep) z /= static_cast<double>(n);
  // Minimum-phase fold, truncated to the low quefrencies.
  std::vector<fft::cplx> lift(n, fft::cplx{0.0, 0.0});
  lift[0] = cep[0].real();
  for (std::size_t q = 1; q < lifter_cutoff; ++q) lift[q] = 2.0 * cep[q].real();
  plan.forward(lift);
  std::vector<fft::cplx> psf(n);
  double e = 0.0;
  for (std::size_t f = 0; f < n; ++f) {
    psf[f] = std::exp(lift[f]);
    e += std::norm(psf[f]);
  }
  // Unit energy: sum_t |s_t|^2 = sum_f |S_f|^2 / n.
  const double norm = std::sqrt(e / static_cast<double>(n));
  double smax = 0.0;
  for (auto& z : psf) {
    z /= norm;
    smax = std::max(smax, std::norm(z));
  }
  const double reg = noise_floor * smax;
  Image out(rf.rows(), rf.cols(), Domain::rf);
  std::vector<fft::cplx> buf(n);
  for (std::size_t c = 0; c < rf.cols(); ++c) {
    for (std::size_t f = 0; f < n; ++f) buf[f] = spectra[c][f] * std::conj(psf[f]) / (std::norm(psf[f]) + reg);
    plan.inverse(buf);
    for (std::size_t r = 0; r < M; ++r) out(r, c) = buf[r].real() / static_cast<double>(n);
  }
  return out;
}

}  // namespace mfd
