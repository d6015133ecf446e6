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
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mfd/error.hpp"

namespace mfd {

/// What a pixel value means. Stored in the raw file header as a u32.
enum class Domain : std::uint32_t { rf = 0, envelope = 1, estimate = 2 };

inline std::string_view to_string(Domain d) {
  switch (d) {
    case Domain::rf: return "rf";
    case Domain::envelope: return "envelope";
    case Domain::estimate: return "estimate";
  }
  return "unknown";
}

/// Dense row-major real image. Rows run along the axial (depth) direction,
/// columns are A-lines.
class Image {
 public:
  Image(std::size_t rows, std::size_t cols, Domain domain = Domain::estimate, double fill = 0.0)
      : rows_(rows), cols_(cols), domain_(domain), data_(rows * cols, fill) {
    check_shape();
    if (!std::isfinite(fill)) throw InvalidArgument("Image: non-finite fill value");
    if (domain == Domain::envelope && fill < 0.0)
      throw InvalidArgument("Image: envelope-domain image with negative fill");
  }

  Image(std::size_t rows, std::size_t cols, std::vector<double> data, Domain domain)
      : rows_(rows), cols_(cols), domain_(domain), data_(std::move(data)) {
    check_shape();
    if (data_.size() != rows_ * cols_)
      throw InvalidArgument("Image: data length " + std::to_string(data_.size()) +
                            " does not match " + std::to_string(rows_) + "x" +
                            std::to_string(cols_));
    validate();
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  Domain domain() const noexcept { return domain_; }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  std::vector<double> column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = data_[r * cols_ + c];
    return out;
  }
  void set_column(std::size_t c, std::span<const double> v) {
    for (std::size_t r = 0; r < rows_; ++r) data_[r * cols_ + c] = v[r];
  }

  bool same_shape(const Image& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

  /// Relabels the domain. Re-validates, so relabelling signed data as
  /// envelope fails.
  Image with_domain(Domain d) const {
    Image out = *this;
    out.domain_ = d;
    out.validate();
    return out;
  }

  /// Throws when a value is non-finite or an envelope value is negative.
  void validate() const {
    for (double v : data_) {
      if (!std::isfinite(v)) throw InvalidArgument("Image: non-finite value");
      if (domain_ == Domain::envelope && v < 0.0)
        throw InvalidArgument("Image: negative value in envelope-domain image");
    }
  }

  friend bool operator==(const Image& a, const Image& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.domain_ == b.domain_ &&
           a.data_ == b.data_;
  }

 private:
  void check_shape() const {
    if (rows_ < 1 || cols_ < 1) throw InvalidArgument("Image: dimensions must be >= 1");
  }

  std::size_t rows_;
  std::size_t cols_;
  Domain domain_;
  std::vector<double> data_;
};

inline double sum(const Image& img) {
  return std::accumulate(img.values().begin(), img.values().end(), 0.0);
}
inline double mean(const Image& img) { return sum(img) / static_cast<double>(img.size()); }
inline double max_value(const Image& img) {
  return *std::max_element(img.values().begin(), img.values().end());
}
inline double min_value(const Image& img) {
  return *std::min_element(img.values().begin(), img.values().end());
}
inline double dot(const Image& a, const Image& b) {
  if (!a.same_shape(b)) throw InvalidArgument("dot: shape mismatch");
  return std::inner_product(a.values().begin(), a.values().end(), b.values().begin(), 0.0);
}
inline double frobenius_norm(const Image& a) { return std::sqrt(dot(a, a)); }

/// Elementwise map into a new image (result is unvalidated estimate-domain
/// unless a domain is supplied).
template <class F>
Image map(const Image& a, F&& f, Domain d = Domain::estimate) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return Image(a.rows(), a.cols(), std::move(out), d);
}

template <class F>
Image zip(const Image& a, const Image& b, F&& f, Domain d = Domain::estimate) {
  if (!a.same_shape(b)) throw InvalidArgument("zip: shape mismatch");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i], b[i]);
  return Image(a.rows(), a.cols(), std::move(out), d);
}

inline Image scaled(const Image& a, double c) {
  return map(a, [c](double v) { return c * v; }, c >= 0.0 ? a.domain() : Domain::estimate);
}

/// p co-registered frames sharing one shape and one domain tag.
class FrameStack {
 public:
  FrameStack(std::vector<Image> frames, Domain domain)
      : frames_(std::move(frames)), domain_(domain) {
    if (frames_.empty()) throw InvalidArgument("FrameStack: no frames");
    for (const auto& f : frames_)
      if (!f.same_shape(frames_.front()))
        throw InvalidArgument("FrameStack: frames do not share dimensions");
  }

  std::size_t size() const noexcept { return frames_.size(); }
  std::size_t rows() const noexcept { return frames_.front().rows(); }
  std::size_t cols() const noexcept { return frames_.front().cols(); }
  std::size_t pixels() const noexcept { return frames_.front().size(); }
  Domain domain() const noexcept { return domain_; }

  const Image& operator[](std::size_t k) const { return frames_.at(k); }
  Image& operator[](std::size_t k) { return frames_.at(k); }
  std::span<const Image> frames() const noexcept { return frames_; }
  auto begin() const noexcept { return frames_.begin(); }
  auto end() const noexcept { return frames_.end(); }

  /// Multichannel operations need at least two frames.
  void require_multichannel(std::string_view who) const {
    if (frames_.size() < 2)
      throw InvalidArgument(std::string(who) + ": p ≥ 2 required, got " +
                            std::to_string(frames_.size()));
  }

  bool same_shape(const Image& img) const noexcept { return frames_.front().same_shape(img); }

  /// Pixelwise mean over frames.
  Image temporal_mean() const {
    Image out(rows(), cols(), Domain::estimate);
    for (const auto& f : frames_)
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += f[i];
    const double inv = 1.0 / static_cast<double>(frames_.size());
    for (auto& v : out.values()) v *= inv;
    return out;
  }

  friend bool operator==(const FrameStack& a, const FrameStack& b) {
    return a.domain_ == b.domain_ && a.frames_ == b.frames_;
  }

 private:
  std::vector<Image> frames_;
  Domain domain_;
};

/// Frobenius norm of the concatenation [F_1 ... F_p].
inline double stacked_norm(std::span<const Image> fields) {
  double s = 0.0;
  for (const auto& f : fields) s += dot(f, f);
  return std::sqrt(s);
}

}  // namespace mfd
