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

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "mfd/error.hpp"

namespace mfd::fft {

using cplx = std::complex<double>;

namespace detail {
// Plan creation and destruction are not thread-safe in FFTW; execution is.
inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace detail

/// Complex-to-complex transform of fixed length. Unnormalized in both
/// directions, so inverse(forward(x)) == n * x.
class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n) : n_(n), buf_(n) {
    if (n == 0) throw InvalidArgument("ComplexFft: length must be >= 1");
    auto* p = reinterpret_cast<fftw_complex*>(buf_.data());
    std::lock_guard lock(detail::planner_mutex());
    fwd_ = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    inv_ = fftw_plan_dft_1d(static_cast<int>(n), p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  }
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;
  ~ComplexFft() {
    std::lock_guard lock(detail::planner_mutex());
    fftw_destroy_plan(fwd_);
    fftw_destroy_plan(inv_);
  }

  std::size_t size() const noexcept { return n_; }

  void forward(std::span<cplx> data) { run(fwd_, data); }
  void inverse(std::span<cplx> data) { run(inv_, data); }

  /// Forward transform of a real sequence zero-padded to n.
  std::vector<cplx> forward_real(std::span<const double> x) {
    std::vector<cplx> out(n_, cplx{0.0, 0.0});
    for (std::size_t i = 0; i < x.size() && i < n_; ++i) out[i] = x[i];
    forward(out);
    return out;
  }

 private:
  void run(fftw_plan plan, std::span<cplx> data) {
    if (data.size() != n_) throw InvalidArgument("ComplexFft: length mismatch");
    std::copy(data.begin(), data.end(), buf_.begin());
    fftw_execute(plan);
    std::copy(buf_.begin(), buf_.end(), data.begin());
  }

  std::size_t n_;
  std::vector<cplx> buf_;
  fftw_plan fwd_{};
  fftw_plan inv_{};
};

/// Smallest power of two >= n.
inline std::size_t next_pow2(std::size_t n) {
  std::size_t m = 1;
  while (m < n) m <<= 1;
  return m;
}

}  // namespace mfd::fft
