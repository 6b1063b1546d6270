#pragma once

// Independent reference implementations used only by the test suite.
// Everything here is written as plainly as possible — quadruple loops and
// direct formula transliterations — so a disagreement with the library
// points at the library, not at the oracle.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mcpc/image.hpp"
#include "mcpc/model.hpp"
#include "mcpc/tensor.hpp"

namespace oracle {

/// Valid cross-correlation with stride, one scalar at a time.
inline mcpc::Tensor conv2d(const mcpc::Tensor& input, const mcpc::Tensor& kernels,
                           std::size_t stride) {
  const std::size_t in_c = input.shape[0], in_h = input.shape[1], in_w = input.shape[2];
  const std::size_t out_c = kernels.shape[0], k = kernels.shape[2];
  const std::size_t out_h = (in_h - k) / stride + 1;
  const std::size_t out_w = (in_w - k) / stride + 1;
  mcpc::Tensor out({out_c, out_h, out_w});
  for (std::size_t oc = 0; oc < out_c; ++oc) {
    for (std::size_t oy = 0; oy < out_h; ++oy) {
      for (std::size_t ox = 0; ox < out_w; ++ox) {
        double acc = 0.0;
        for (std::size_t ic = 0; ic < in_c; ++ic) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            for (std::size_t kx = 0; kx < k; ++kx) {
              const double x = input.data[(ic * in_h + oy * stride + ky) * in_w +
                                          ox * stride + kx];
              const double w = kernels.data[((oc * in_c + ic) * k + ky) * k + kx];
              acc += x * w;
            }
          }
        }
        out.data[(oc * out_h + oy) * out_w + ox] = acc;
      }
    }
  }
  return out;
}

/// y = W x + b for a flat input.
inline std::vector<double> linear(std::span<const double> x, const mcpc::Tensor& weight,
                                  const mcpc::Tensor& bias) {
  const std::size_t rows = weight.shape[0], cols = weight.shape[1];
  std::vector<double> y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = bias.data[r];
    for (std::size_t c = 0; c < cols; ++c) acc += weight.data[r * cols + c] * x[c];
    y[r] = acc;
  }
  return y;
}

/// The contrastive loss written exactly as the formula reads, without any
/// numerical stabilization:
///   L = -(1/(K-1)) * sum_j log( exp(-e[j][j+1]) / sum_{j' != j} exp(-e[j][j']) )
/// where e[a][b] is the squared error of predicting image b's latent from
/// image a's latent.
inline double contrastive_loss(const mcpc::ModelParams& m, std::span<const mcpc::Image> seq) {
  const std::size_t k = seq.size();
  std::vector<double> z(k);
  for (std::size_t j = 0; j < k; ++j) z[j] = mcpc::encode(m, seq[j]);
  std::vector<std::vector<double>> e(k, std::vector<double>(k, 0.0));
  for (std::size_t a = 0; a < k; ++a) {
    const double t = mcpc::predict_latent(m, z[a]);
    for (std::size_t b = 0; b < k; ++b) {
      const double d = t - z[b];
      e[a][b] = d * d;
    }
  }
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    double denom = 0.0;
    for (std::size_t jp = 0; jp < k; ++jp) {
      if (jp == j) continue;
      denom += std::exp(-e[j][jp]);
    }
    total += -std::log(std::exp(-e[j][j + 1]) / denom);
  }
  return total / static_cast<double>(k - 1);
}

/// Number of connected foreground blobs (8-connectivity); foreground is any
/// pixel that differs from `background`.
inline int count_blobs(const mcpc::Image& img, double background) {
  const std::size_t h = img.height, w = img.width;
  std::vector<char> seen(h * w, 0);
  std::vector<std::size_t> stack;
  int blobs = 0;
  for (std::size_t start = 0; start < h * w; ++start) {
    if (seen[start] || img.pixels[start] == background) continue;
    ++blobs;
    stack.push_back(start);
    seen[start] = 1;
    while (!stack.empty()) {
      const std::size_t cur = stack.back();
      stack.pop_back();
      const std::size_t y = cur / w, x = cur % w;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dy == 0 && dx == 0) continue;
          const std::ptrdiff_t ny = static_cast<std::ptrdiff_t>(y) + dy;
          const std::ptrdiff_t nx = static_cast<std::ptrdiff_t>(x) + dx;
          if (ny < 0 || nx < 0 || ny >= static_cast<std::ptrdiff_t>(h) ||
              nx >= static_cast<std::ptrdiff_t>(w)) {
            continue;
          }
          const std::size_t ni = static_cast<std::size_t>(ny) * w + static_cast<std::size_t>(nx);
          if (!seen[ni] && img.pixels[ni] != background) {
            seen[ni] = 1;
            stack.push_back(ni);
          }
        }
      }
    }
  }
  return blobs;
}

/// Number of foreground pixels.
inline std::size_t count_foreground(const mcpc::Image& img, double background) {
  std::size_t n = 0;
  for (double p : img.pixels) n += p != background ? 1 : 0;
  return n;
}

// 0.999 chi-square quantiles, for "the statistic should not scream" checks
// at a false-alarm rate of one in a thousand.
inline constexpr double kChiSq999Df3 = 16.266;
inline constexpr double kChiSq999Df5 = 20.515;
inline constexpr double kChiSq999Df9 = 27.877;

}  // namespace oracle
