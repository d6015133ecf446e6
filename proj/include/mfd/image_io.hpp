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

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "mfd/image.hpp"

namespace mfd::io {

enum class Format { raw, pgm, png };

inline constexpr std::array<char, 4> kRawMagic{'M', 'A', 'D', 'S'};

/// Format from a file extension: .raw/.f32, .pgm, .png.
inline Format format_from_path(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".raw" || ext == ".f32") return Format::raw;
  if (ext == ".pgm") return Format::pgm;
  if (ext == ".png") return Format::png;
  throw InvalidArgument("unrecognized image extension '" + ext + "'");
}

/// Linear min-max quantization to 8 bits. A constant image maps to 255.
inline std::vector<std::uint8_t> quantize8(const Image& img) {
  const double lo = min_value(img), hi = max_value(img);
  std::vector<std::uint8_t> out(img.size());
  if (!(hi > lo)) {
    std::fill(out.begin(), out.end(), std::uint8_t{255});
    return out;
  }
  const double scale = 255.0 / (hi - lo);
  for (std::size_t i = 0; i < img.size(); ++i) {
    const double q = std::floor((img[i] - lo) * scale);
    out[i] = static_cast<std::uint8_t>(std::clamp(q, 0.0, 255.0));
  }
  return out;
}

namespace detail {

inline void put_u32(std::string& s, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) s.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

inline std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace detail

/// 16-byte header (magic, M, N, domain) then M*N little-endian f32.
inline std::string encode_raw(const Image& img) {
  std::string s(kRawMagic.begin(), kRawMagic.end());
  detail::put_u32(s, static_cast<std::uint32_t>(img.rows()));
  detail::put_u32(s, static_cast<std::uint32_t>(img.cols()));
  detail::put_u32(s, static_cast<std::uint32_t>(img.domain()));
  s.reserve(16 + 4 * img.size());
  for (double v : img.values()) detail::put_u32(s, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  return s;
}

inline Image decode_raw(const std::string& bytes) {
  if (bytes.size() < 16 || std::memcmp(bytes.data(), kRawMagic.data(), 4) != 0)
    throw IoError("raw image: bad magic or short header");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t m = detail::get_u32(p + 4), n = detail::get_u32(p + 8);
  const std::uint32_t d = detail::get_u32(p + 12);
  if (m == 0 || n == 0) throw IoError("raw image: zero dimension");
  if (d > 2) throw IoError("raw image: unknown domain tag " + std::to_string(d));
  const std::size_t count = static_cast<std::size_t>(m) * n;
  if (bytes.size() != 16 + 4 * count)
    throw IoError("raw image: payload length does not match " + std::to_string(m) + "x" +
                  std::to_string(n));
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i)
    data[i] = std::bit_cast<float>(detail::get_u32(p + 16 + 4 * i));
  return Image(m, n, std::move(data), static_cast<Domain>(d));
}

inline std::string encode_pgm(const Image& img) {
  std::string s = "P5\n" + std::to_string(img.cols()) + " " + std::to_string(img.rows()) + "\n255\n";
  const auto q = quantize8(img);
  s.append(q.begin(), q.end());
  return s;
}

/// Reads an 8-bit P5 file into [0,255] envelope values.
inline Image decode_pgm(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  in >> magic;
  if (magic != "P5") throw IoError("pgm: expected P5 magic");
  auto next_int = [&]() {
    in >> std::ws;
    while (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      in >> std::ws;
    }
    long v = -1;
    if (!(in >> v)) throw IoError("pgm: malformed header");
    return v;
  };
  const long w = next_int(), h = next_int(), maxval = next_int();
  if (w <= 0 || h <= 0 || maxval != 255) throw IoError("pgm: unsupported header");
  in.get();
  const auto offset = static_cast<std::size_t>(in.tellg());
  const std::size_t count = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() != offset + count) throw IoError("pgm: payload length mismatch");
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i)
    data[i] = static_cast<unsigned char>(bytes[offset + i]);
  return Image(static_cast<std::size_t>(h), static_cast<std::size_t>(w), std::move(data),
               Domain::envelope);
}

inline void write_png(const std::filesystem::path& path, const Image& img) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "wb"), &std::fclose);
  if (!fp) throw IoError("cannot open '" + path.string() + "' for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: allocation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("png: write failed for '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.cols()), static_cast<png_uint_32>(img.rows()),
               8, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  auto q = quantize8(img);
  for (std::size_t r = 0; r < img.rows(); ++r) png_write_row(png, q.data() + r * img.cols());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

/// Reads an 8-bit grayscale PNG into [0,255] envelope values.
inline Image read_png(const std::filesystem::path& path) {
  std::unique_ptr<FILE, int (*)(FILE*)> fp(std::fopen(path.string().c_str(), "rb"), &std::fclose);
  if (!fp) throw IoError("cannot open '" + path.string() + "' for reading");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: allocation failed");
  }
  std::vector<std::uint8_t> pixels;
  png_uint_32 w = 0, h = 0;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: malformed file '" + path.string() + "'");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  w = png_get_image_width(png, info);
  h = png_get_image_height(png, info);
  if (png_get_bit_depth(png, info) != 8 || png_get_color_type(png, info) != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("png: only 8-bit grayscale is supported");
  }
  pixels.resize(static_cast<std::size_t>(w) * h);
  for (png_uint_32 r = 0; r < h; ++r) png_read_row(png, pixels.data() + static_cast<std::size_t>(r) * w, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  std::vector<double> data(pixels.begin(), pixels.end());
  return Image(h, w, std::move(data), Domain::envelope);
}

inline void write_image(const std::filesystem::path& path, const Image& img, Format fmt) {
  switch (fmt) {
    case Format::raw: detail::spit(path, encode_raw(img)); return;
    case Format::pgm: detail::spit(path, encode_pgm(img)); return;
    case Format::png: write_png(path, img); return;
  }
}

inline void write_image(const std::filesystem::path& path, const Image& img) {
  write_image(path, img, format_from_path(path));
}

inline Image read_image(const std::filesystem::path& path, Format fmt) {
  switch (fmt) {
    case Format::raw: return decode_raw(detail::slurp(path));
    case Format::pgm: return decode_pgm(detail::slurp(path));
    case Format::png: return read_png(path);
  }
  throw InvalidArgument("read_image: unknown format");
}

inline Image read_image(const std::filesystem::path& path) {
  return read_image(path, format_from_path(path));
}

}  // namespace mfd::io
