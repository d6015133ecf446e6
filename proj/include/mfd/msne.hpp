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
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfd/image.hpp"
#include "mfd/metrics.hpp"

namespace mfd {

/// quadratic: J = sum_{i<j} ||E_ij||_F^2.  quartic: J = sum_{i<j} sum E_ij^4.
enum class CostForm { quadratic, quartic };

struct MsneConfig {
  double beta1 = 0.0;
  std::size_t max_iters = 5000;
  /// Stop when |J_c(q) - J_c(q+1)| <= tol * |J_c(q)|.
  double tol = 1e-10;
  CostForm cost_form = CostForm::quadratic;
  /// Step halvings allowed per iteration before giving up.
  std::size_t max_halvings = 60;
  /// Accepted iterations satisfy J_c(q+1) <= J_c(q) + descent_slack.
  double descent_slack = 1e-12;

  void validate() const {
    if (!(beta1 >= 0.0) || !std::isfinite(beta1)) throw InvalidArgument("MsneConfig: beta1 must be >= 0");
    if (max_iters < 1) throw InvalidArgument("MsneConfig: max_iters must be >= 1");
    if (!(tol >= 0.0)) throw InvalidArgument("MsneConfig: tol must be >= 0");
    if (!(descent_slack >= 0.0)) throw InvalidArgument("MsneConfig: descent_slack must be >= 0");
  }
};

struct SpeckleEstimate {
  std::vector<Image> fields;
  /// J_c at the start (entry 0) and after every accepted iteration.
  std::vector<double> cost_trace;
  /// Accepted step size per iteration.
  std::vector<double> step_trace;
  /// NPM against the supplied truth, aligned with cost_trace.
  std::vector<double> npm_trace;
  std::size_t iterations_used = 0;
  /// Iterations in which the variable step had to be halved at least once.
  std::size_t halving_iterations = 0;
  std::size_t halvings = 0;
  /// Iterations where the step formula gave mu < 0 and |mu| was used.
  std::size_t sign_flips = 0;
  bool converged = false;
  std::string stop_reason;

  double halving_rate() const {
    return iterations_used ? static_cast<double>(halving_iterations) / static_cast<double>(iterations_used) : 0.0;
  }
};

namespace detail {
inline void check_fields(const FrameStack& stack, std::span<const Image> fields, const char* who) {
  if (fields.size() != stack.size()) throw InvalidArgument(std::string(who) + ": field count differs from frame count");
  for (const auto& f : fields)
    if (!stack.same_shape(f)) throw InvalidArgument(std::string(who) + ": field shape differs from frames");
}
}  // namespace detail

/// E_ij = H_i .* U_j - H_j .* U_i (0-based, i < j).
inline Image cross_error(const FrameStack& stack, std::span<const Image> fields, std::size_t i, std::size_t j) {
  detail::check_fields(stack, fields, "cross_error");
  if (!(i < j && j < stack.size())) throw InvalidArgument("cross_error: indices must satisfy 0 <= i < j < p");
  Image e(stack.rows(), stack.cols(), Domain::estimate);
  const auto &Hi = stack[i], &Hj = stack[j], &Ui = fields[i], &Uj = fields[j];
  for (std::size_t x = 0; x < e.size(); ++x) e[x] = Hi[x] * Uj[x] - Hj[x] * Ui[x];
  return e;
}

/// Direct pairwise evaluation of the cross-relation cost.
inline double msne_cost(const FrameStack& stack, std::span<const Image> fields, CostForm form = CostForm::quadratic) {
  stack.require_multichannel("msne_cost");
  detail::check_fields(stack, fields, "msne_cost");
  double J = 0.0;
  for (std::size_t i = 0; i < stack.size(); ++i)
    for (std::size_t j = i + 1; j < stack.size(); ++j) {
      const auto &Hi = stack[i], &Hj = stack[j], &Ui = fields[i], &Uj = fields[j];
      for (std::size_t x = 0; x < Hi.size(); ++x) {
        const double e = Hi[x] * Uj[x] - Hj[x] * Ui[x];
        J += form == CostForm::quadratic ? e * e : (e * e) * (e * e);
      }
    }
  return J;
}

/// Zero-lag correlation sum(H_k .* U_k).
inline double corr_constraint(const FrameStack& stack, std::span<const Image> fields, std::size_t k) {
  detail::check_fields(stack, fields, "corr_constraint");
  if (k >= stack.size()) throw InvalidArgument("corr_constraint: frame index out of range");
  return dot(stack[k], fields[k]);
}

/// Gradient of J_c = J - beta1 sum_k corr_k with respect to each U_k.
inline std::vector<Image> msne_gradient(const FrameStack& stack, std::span<const Image> fields, const MsneConfig& cfg) {
  stack.require_multichannel("msne_gradient");
  detail::check_fields(stack, fields, "msne_gradient");
  const std::size_t p = stack.size(), n = stack.pixels();
  std::vector<Image> g(p, Image(stack.rows(), stack.cols(), Domain::estimate));
  if (cfg.cost_form == CostForm::quadratic) {
    // grad_k = 2 (S2 U_k - H_k SU), S2 = sum H_i^2, SU = sum H_i U_i.
    for (std::size_t x = 0; x < n; ++x) {
      double s2 = 0.0, su = 0.0;
      for (std::size_t i = 0; i < p; ++i) {
        s2 += stack[i][x] * stack[i][x];
        su += stack[i][x] * fields[i][x];
      }
      for (std::size_t k = 0; k < p; ++k) g[k][x] = 2.0 * (s2 * fields[k][x] - stack[k][x] * su);
    }
  } else {
    // grad_k = 4 sum_{i != k} E_ik^3 H_i.
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t k = i + 1; k < p; ++k)
        for (std::size_t x = 0; x < n; ++x) {
          const double e = stack[i][x] * fields[k][x] - stack[k][x] * fields[i][x];
          const double e3 = 4.0 * e * e * e;
          g[k][x] += e3 * stack[i][x];
          g[i][x] -= e3 * stack[k][x];
        }
  }
  if (cfg.beta1 > 0.0)
    for (std::size_t k = 0; k < p; ++k)
      for (std::size_t x = 0; x < n; ++x) g[k][x] -= cfg.beta1 * stack[k][x];
  return g;
}

/// mu = sum(U .* g) / sum(g .* g) over all frames; nullopt for a zero gradient.
inline std::optional<double> vss(std::span<const Image> fields, std::span<const Image> grad) {
  if (fields.size() != grad.size()) throw InvalidArgument("vss: field count mismatch");
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < grad.size(); ++k) {
    num += dot(fields[k], grad[k]);
    den += dot(grad[k], grad[k]);
  }
  if (den == 0.0) return std::nullopt;
  return num / den;
}

namespace detail {

/// Pixel-interleaved working set: value (x, k) lives at x * p + k, so the
/// per-pixel loops over frames are contiguous.
class MsneWorkspace {
 public:
  MsneWorkspace(const FrameStack& stack, const MsneConfig& cfg, const FrameStack* truth)
      : p_(stack.size()), n_(stack.pixels()), cfg_(cfg), H_(n_ * p_), S2_(n_, 0.0) {
    for (std::size_t k = 0; k < p_; ++k)
      for (std::size_t x = 0; x < n_; ++x) H_[x * p_ + k] = stack[k][x];
    for (std::size_t x = 0; x < n_; ++x)
      for (std::size_t k = 0; k < p_; ++k) S2_[x] += H_[x * p_ + k] * H_[x * p_ + k];
    if (truth) {
      T_.resize(n_ * p_);
      for (std::size_t k = 0; k < p_; ++k)
        for (std::size_t x = 0; x < n_; ++x) T_[x * p_ + k] = (*truth)[k][x];
      for (double v : T_) tt_ += v * v;
    }
  }

  std::size_t size() const noexcept { return n_ * p_; }
  bool has_truth() const noexcept { return !T_.empty(); }

  struct Point {
    double cost = 0.0, corr = 0.0;
    double truth_dot = 0.0, self_dot = 0.0;
  };

  /// Cost, correlation sum and gradient (written to g) at U. The quadratic
  /// cost uses sum_{i<j} E_ij^2 = S2 |U - (SU/S2) H|^2 per pixel, which
  /// avoids the cancellation in S2 UU - SU^2.
  Point evaluate(const std::vector<double>& U, std::vector<double>& g) const {
    Point pt;
    const std::size_t p = p_;
    if (cfg_.cost_form == CostForm::quadratic) {
      for (std::size_t x = 0; x < n_; ++x) {
        const double* h = &H_[x * p];
        const double* u = &U[x * p];
        double* gx = &g[x * p];
        const double s2 = S2_[x];
        double su = 0.0;
        for (std::size_t k = 0; k < p; ++k) su += h[k] * u[k];
        pt.corr += su;
        const double t = s2 > 0.0 ? su / s2 : 0.0;
        double perp = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          gx[k] = 2.0 * (s2 * u[k] - h[k] * su) - cfg_.beta1 * h[k];
          const double d = u[k] - t * h[k];
          perp += d * d;
        }
        pt.cost += s2 * perp;
      }
    } else {
      std::fill(g.begin(), g.end(), 0.0);
      for (std::size_t x = 0; x < n_; ++x) {
        const double* h = &H_[x * p];
        const double* u = &U[x * p];
        double* gx = &g[x * p];
        for (std::size_t k = 0; k < p; ++k) pt.corr += h[k] * u[k];
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t j = i + 1; j < p; ++j) {
            const double e = h[i] * u[j] - h[j] * u[i];
            const double e2 = e * e;
            pt.cost += e2 * e2;
            const double e3 = 4.0 * e2 * e;
            gx[j] += e3 * h[i];
            gx[i] -= e3 * h[j];
          }
        for (std::size_t k = 0; k < p; ++k) gx[k] -= cfg_.beta1 * h[k];
      }
    }
    for (std::size_t i = 0; i < U.size(); ++i) pt.self_dot += U[i] * U[i];
    if (has_truth())
      for (std::size_t i = 0; i < U.size(); ++i) pt.truth_dot += T_[i] * U[i];
    return pt;
  }

  /// NPM from inner products: |rho|^2 = |u|^2 - (u.U)^2 / |U|^2.
  double npm_db(const Point& pt) const {
    const double rr = tt_ - pt.truth_dot * pt.truth_dot / pt.self_dot;
    if (!(rr > 0.0)) return -metrics::kDbLimit;
    return metrics::clamp_db(10.0 * std::log10(rr / tt_));
  }

  struct Line {
    std::vector<double> poly;  // unnormalized cost along U - mu g, poly[d] * mu^d
    double uu = 0.0, ug = 0.0, gg = 0.0, hg = 0.0;
  };

  Line line(const std::vector<double>& U, const std::vector<double>& g, double cost0) const {
    Line ln;
    const std::size_t p = p_;
    for (std::size_t i = 0; i < U.size(); ++i) {
      ln.uu += U[i] * U[i];
      ln.ug += U[i] * g[i];
      ln.gg += g[i] * g[i];
      ln.hg += H_[i] * g[i];
    }
    if (cfg_.cost_form == CostForm::quadratic) {
      // Q(V) = S2 |V_perp|^2 is a quadratic form: Q(U - mu g) = Q(U) - 2 mu B(U, g) + mu^2 Q(g).
      double b = 0.0, q = 0.0;
      for (std::size_t x = 0; x < n_; ++x) {
        const double s2 = S2_[x];
        if (s2 == 0.0) continue;
        const double* h = &H_[x * p];
        const double* u = &U[x * p];
        const double* gx = &g[x * p];
        double su = 0.0, sg = 0.0;
        for (std::size_t k = 0; k < p; ++k) su += h[k] * u[k], sg += h[k] * gx[k];
        const double tu = su / s2, tg = sg / s2;
        double bu = 0.0, qq = 0.0;
        for (std::size_t k = 0; k < p; ++k) {
          const double du = u[k] - tu * h[k], dg = gx[k] - tg * h[k];
          bu += du * dg;
          qq += dg * dg;
        }
        b += s2 * bu;
        q += s2 * qq;
      }
      ln.poly = {cost0, -2.0 * b, q};
    } else {
      // E(mu) = E0 - mu E1 per pixel and pair; expand sum E(mu)^4.
      double c1 = 0.0, c2 = 0.0, c3 = 0.0, c4 = 0.0;
      for (std::size_t x = 0; x < n_; ++x) {
        const double* h = &H_[x * p];
        const double* u = &U[x * p];
        const double* gx = &g[x * p];
        for (std::size_t i = 0; i < p; ++i)
          for (std::size_t j = i + 1; j < p; ++j) {
            const double e0 = h[i] * u[j] - h[j] * u[i];
            const double e1 = h[i] * gx[j] - h[j] * gx[i];
            const double e00 = e0 * e0, e11 = e1 * e1;
            c1 += e00 * e0 * e1;
            c2 += e00 * e11;
            c3 += e0 * e11 * e1;
            c4 += e11 * e11;
          }
      }
      ln.poly = {cost0, -4.0 * c1, 6.0 * c2, -4.0 * c3, c4};
    }
    return ln;
  }

  std::vector<Image> to_images(const std::vector<double>& U, std::size_t rows, std::size_t cols) const {
    std::vector<Image> out(p_, Image(rows, cols, Domain::estimate));
    for (std::size_t k = 0; k < p_; ++k)
      for (std::size_t x = 0; x < n_; ++x) out[k][x] = U[x * p_ + k];
    return out;
  }

 private:
  std::size_t p_, n_;
  const MsneConfig& cfg_;
  std::vector<double> H_, S2_, T_;
  double tt_ = 0.0;
};

inline double poly_at(const std::vector<double>& c, double mu) {
  double v = 0.0;
  for (std::size_t d = c.size(); d-- > 0;) v = v * mu + c[d];
  return v;
}

}  // namespace detail

/// Iterative speckle estimation: U <- normalize(U - mu grad J_c) with the
/// variable step mu, halved until J_c does not increase. Starts from
/// all-ones fields scaled to unit Frobenius norm.
inline SpeckleEstimate estimate_speckle(const FrameStack& stack, const MsneConfig& cfg,
                                        const FrameStack* truth = nullptr) {
  cfg.validate();
  stack.require_multichannel("estimate_speckle");
  if (stack.domain() != Domain::envelope) throw InvalidArgument("estimate_speckle: envelope-domain stack required");
  if (truth && (truth->size() != stack.size() || !truth->same_shape(stack[0])))
    throw InvalidArgument("estimate_speckle: truth shape mismatch");
  const detail::MsneWorkspace ws(stack, cfg, truth);
  const std::size_t N = ws.size();
  const int degree = cfg.cost_form == CostForm::quadratic ? 2 : 4;

  SpeckleEstimate out;
  std::vector<double> U(N, 1.0 / std::sqrt(static_cast<double>(N))), g(N), Unew(N), gnew(N);
  auto objective = [&](const detail::MsneWorkspace::Point& pt) { return pt.cost - cfg.beta1 * pt.corr; };

  auto cur = ws.evaluate(U, g);
  double Jc = objective(cur);
  out.cost_trace.push_back(Jc);
  if (truth) out.npm_trace.push_back(ws.npm_db(cur));
  out.stop_reason = "max_iters";

  for (std::size_t q = 1; q <= cfg.max_iters; ++q) {
    const auto ln = ws.line(U, g, cur.cost);
    if (ln.gg == 0.0) {
      out.converged = true;
      out.stop_reason = "zero_gradient";
      break;
    }
    double mu = ln.ug / ln.gg;
    if (!std::isfinite(mu)) throw DivergenceError("estimate_speckle: non-finite step size", q);
    if (mu <= 0.0) {
      ++out.sign_flips;
      mu = std::abs(mu);
    }
    auto trial = [&](double m) {
      const double nrm = std::sqrt(ln.uu - 2.0 * m * ln.ug + m * m * ln.gg);
      return detail::poly_at(ln.poly, m) / std::pow(nrm, degree) - cfg.beta1 * (cur.corr - m * ln.hg) / nrm;
    };

    std::size_t halved = 0;
    bool accepted = false;
    detail::MsneWorkspace::Point next;
    for (; halved <= cfg.max_halvings; ++halved, mu *= 0.5) {
      if (!(trial(mu) <= Jc + cfg.descent_slack)) continue;
      double n2 = 0.0;
      for (std::size_t i = 0; i < N; ++i) {
        Unew[i] = U[i] - mu * g[i];
        n2 += Unew[i] * Unew[i];
      }
      const double nrm = std::sqrt(n2);
      if (!(nrm > 0.0) || !std::isfinite(nrm)) throw DivergenceError("estimate_speckle: degenerate update", q);
      const double inv = 1.0 / nrm;
      for (auto& v : Unew) v *= inv;
      next = ws.evaluate(Unew, gnew);
      if (!std::isfinite(next.cost)) throw DivergenceError("estimate_speckle: non-finite cost", q);
      // The closed form can disagree with the direct value by rounding.
      if (objective(next) <= Jc + cfg.descent_slack) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      out.converged = true;
      out.stop_reason = "no_descent";
      break;
    }
    if (halved > 0) {
      ++out.halving_iterations;
      out.halvings += halved;
    }
    U.swap(Unew);
    g.swap(gnew);
    cur = next;
    const double Jn = objective(cur);
    out.cost_trace.push_back(Jn);
    out.step_trace.push_back(mu);
    if (truth) out.npm_trace.push_back(ws.npm_db(cur));
    out.iterations_used = q;
    const double change = std::abs(Jc - Jn), ref = std::abs(Jc);
    Jc = Jn;
    if (change <= cfg.tol * ref) {
      out.converged = true;
      out.stop_reason = "tol";
      break;
    }
  }
  out.fields = ws.to_images(U, stack.rows(), stack.cols());
  return out;
}

/// CSV with columns iteration,J,mu,npm (npm empty without ground truth).
inline void write_trace_csv(const std::string& path, const SpeckleEstimate& est) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  os << "iteration,J,mu,npm\n";
  os.precision(17);
  for (std::size_t q = 0; q < est.cost_trace.size(); ++q) {
    os << q << ',' << est.cost_trace[q] << ',';
    if (q > 0) os << est.step_trace[q - 1];
    os << ',';
    if (q < est.npm_trace.size()) os << est.npm_trace[q];
    os << '\n';
  }
}

}  // namespace mfd
