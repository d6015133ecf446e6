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
#include <complex>
#include <vector>

#include "mfd/fft.hpp"
#include "mfd/image.hpp"

namespace mfd {

/// Analytic-signal multiplier for bin k of an n-point DFT.
inline double analytic_weight(std::size_t k, std::size_t n) {
  if (k == 0) return 1.0;
  if (n % 2 == 0) {
    if (k < n / 2) return 2.0;
    if (k == n / 2) return 1.0;
    return 0.0;
  }
  return k <= (n - 1) / 2 ? 2.0 : 0.0;
}

/// Magnitude of the analytic signal of each column (axial direction).
inline Image envelope(const Image& rf) {
  rf.validate();
  const std::size_t m = rf.rows();
  fft::ComplexFft plan(m);
  std::vector<fft::cplx> buf(m);
  Image out(rf.rows(), rf.cols(), Domain::envelope);
  for (std::size_t c = 0; c < rf.cols(); ++c) {
    for (std::size_t r = 0; r < m; ++r) buf[r] = rf(r, c);
    plan.forward(buf);
    for (std::size_t k = 0; k < m; ++k) buf[k] *= analytic_weight(k, m);
    plan.inverse(buf);
    for (std::size_t r = 0; r < m; ++r) out(r, c) = std::abs(buf[r]) / static_cast<double>(m);
  }
  return out;
}

}  // namespace mfd
