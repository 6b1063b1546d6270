#pragma once

#include <zlib.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcpc/tensor.hpp"

namespace mcpc {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Grayscale image, values in [0,1], row-major.
struct Image {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(std::size_t h, std::size_t w, double fill = 0.0)
      : height(h), width(w), pixels(h * w, fill) {}

  double at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
  double& at(std::size_t y, std::size_t x) { return pixels[y * width + x]; }

  bool operator==(const Image& o) const {
    return height == o.height && width == o.width && pixels == o.pixels;
  }
};

inline Tensor image_to_tensor(const Image& img) {
  Tensor t({1, img.height, img.width});
  t.data = img.pixels;
  return t;
}

/// Shifts content by (dy, dx); pixels moved in from outside take `fill`.
inline Image translate(const Image& img, int dy, int dx, double fill) {
  Image out(img.height, img.width, fill);
  for (std::size_t y = 0; y < img.height; ++y) {
    const long long sy = static_cast<long long>(y) - dy;
    if (sy < 0 || sy >= static_cast<long long>(img.height)) continue;
    for (std::size_t x = 0; x < img.width; ++x) {
      const long long sx = static_cast<long long>(x) - dx;
      if (sx < 0 || sx >= static_cast<long long>(img.width)) continue;
      out.at(y, x) = img.at(static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
    }
  }
  return out;
}

inline std::uint8_t to_byte(double v) {
  v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
  return static_cast<std::uint8_t>(std::lround(v * 255.0));
}

inline void write_pgm(const std::filesystem::path& path, const Image& img) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  std::fprintf(f, "P5\n%zu %zu\n255\n", img.width, img.height);
  std::vector<std::uint8_t> row(img.width);
  for (std::size_t y = 0; y < img.height; ++y) {
    for (std::size_t x = 0; x < img.width; ++x) row[x] = to_byte(img.at(y, x));
    std::fwrite(row.data(), 1, row.size(), f);
  }
  std::fclose(f);
}

namespace detail {

inline void png_chunk(std::vector<std::uint8_t>& out, const char type[4],
                      const std::uint8_t* data, std::size_t n) {
  auto be32 = [&out](std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
  };
  be32(static_cast<std::uint32_t>(n));
  std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), data, data + n);
  const uLong crc = ::crc32(0L, out.data() + crc_start, static_cast<uInt>(4 + n));
  be32(static_cast<std::uint32_t>(crc));
}

}  // namespace detail

/// 8-bit grayscale PNG (color type 0), one zlib-compressed IDAT.
inline void write_png(const std::filesystem::path& path, const Image& img) {
  const std::size_t w = img.width, h = img.height;
  std::vector<std::uint8_t> raw((w + 1) * h);
  for (std::size_t y = 0; y < h; ++y) {
    raw[y * (w + 1)] = 0;  // filter none
    for (std::size_t x = 0; x < w; ++x) raw[y * (w + 1) + 1 + x] = to_byte(img.at(y, x));
  }
  uLongf comp_len = compressBound(static_cast<uLong>(raw.size()));
  std::vector<std::uint8_t> comp(comp_len);
  if (compress2(comp.data(), &comp_len, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK) {
    throw IoError("png: zlib compression failed");
  }
  comp.resize(comp_len);

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::uint8_t ihdr[13];
  auto put32 = [](std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v >> 24);
    p[1] = static_cast<std::uint8_t>(v >> 16);
    p[2] = static_cast<std::uint8_t>(v >> 8);
    p[3] = static_cast<std::uint8_t>(v);
  };
  put32(ihdr, static_cast<std::uint32_t>(w));
  put32(ihdr + 4, static_cast<std::uint32_t>(h));
  ihdr[8] = 8;   // bit depth
  ihdr[9] = 0;   // grayscale
  ihdr[10] = ihdr[11] = ihdr[12] = 0;
  detail::png_chunk(out, "IHDR", ihdr, sizeof(ihdr));
  detail::png_chunk(out, "IDAT", comp.data(), comp.size());
  detail::png_chunk(out, "IEND", nullptr, 0);

  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  std::fwrite(out.data(), 1, out.size(), f);
  std::fclose(f);
}

}  // namespace mcpc
