#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#include "mcpc/tensor.hpp"

namespace mcpc {

/// Forward/backward kernels for the three layer types used by the encoder
/// and predictor networks. Convolutions are valid cross-correlations (no
/// padding); output dims are floor((H - k) / stride) + 1.

namespace detail {

/// C[M,N] += A[M,K] * B[K,N], all row-major and dense.
inline void matmul_acc(std::size_t m, std::size_t k, std::size_t n,
                       const double* a, const double* b, double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    const double* ai = a + i * k;
    for (std::size_t kk = 0; kk < k; ++kk) {
      const double w = ai[kk];
      const double* bk = b + kk * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += w * bk[j];
    }
  }
}

/// Unrolls conv input patches into a [Cin*k*k, OH*OW] matrix.
inline void im2col(const Tensor& input, std::size_t k, std::size_t stride,
                   std::size_t oh, std::size_t ow, std::vector<double>& cols) {
  const std::size_t cin = input.shape[0];
  const std::size_t h = input.shape[1];
  const std::size_t w = input.shape[2];
  (void)h;
  const std::size_t n = oh * ow;
  cols.assign(cin * k * k * n, 0.0);
  for (std::size_t ic = 0; ic < cin; ++ic) {
    const double* plane = input.data.data() + ic * (input.shape[1] * w);
    for (std::size_t ky = 0; ky < k; ++ky) {
      for (std::size_t kx = 0; kx < k; ++kx) {
        double* row = cols.data() + ((ic * k + ky) * k + kx) * n;
        for (std::size_t oy = 0; oy < oh; ++oy) {
          const double* src = plane + (oy * stride + ky) * w + kx;
          double* dst = row + oy * ow;
          for (std::size_t ox = 0; ox < ow; ++ox) dst[ox] = src[ox * stride];
        }
      }
    }
  }
}

}  // namespace detail

inline void conv2d_check(const Tensor& input, const Tensor& kernels, std::size_t stride) {
  if (input.shape.size() != 3) {
    throw ShapeError("conv2d: input must be [C,H,W], got " + shape_str(input.shape));
  }
  if (kernels.shape.size() != 4) {
    throw ShapeError("conv2d: kernels must be [Cout,Cin,k,k], got " + shape_str(kernels.shape));
  }
  if (kernels.shape[2] != kernels.shape[3]) {
    throw ShapeError("conv2d: kernels must be square");
  }
  if (input.shape[0] != kernels.shape[1]) {
    throw ShapeError("conv2d: input channels " + std::to_string(input.shape[0]) +
                     " != kernel channels " + std::to_string(kernels.shape[1]));
  }
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  const std::size_t k = kernels.shape[2];
  if (input.shape[1] < k || input.shape[2] < k) {
    throw ShapeError("conv2d: input smaller than kernel");
  }
}

inline std::vector<std::size_t> conv2d_output_shape(const Tensor& input,
                                                    const Tensor& kernels,
                                                    std::size_t stride) {
  const std::size_t k = kernels.shape[2];
  const std::size_t oh = (input.shape[1] - k) / stride + 1;
  const std::size_t ow = (input.shape[2] - k) / stride + 1;
  return {kernels.shape[0], oh, ow};
}

inline Tensor conv2d_forward(const Tensor& input, const Tensor& kernels, std::size_t stride) {
  conv2d_check(input, kernels, stride);
  const auto out_shape = conv2d_output_shape(input, kernels, stride);
  const std::size_t cout = out_shape[0], oh = out_shape[1], ow = out_shape[2];
  const std::size_t k = kernels.shape[2];
  const std::size_t kdim = input.shape[0] * k * k;

  Tensor out(out_shape);
  std::vector<double> cols;
  detail::im2col(input, k, stride, oh, ow, cols);
  detail::matmul_acc(cout, kdim, oh * ow, kernels.data.data(), cols.data(), out.data.data());
  return out;
}

/// Accumulates into grad_input / grad_kernels (either may be null).
inline void conv2d_backward(const Tensor& input, const Tensor& kernels, std::size_t stride,
                            const Tensor& grad_out, Tensor* grad_input, Tensor* grad_kernels) {
  conv2d_check(input, kernels, stride);
  const auto out_shape = conv2d_output_shape(input, kernels, stride);
  const std::size_t cout = out_shape[0], oh = out_shape[1], ow = out_shape[2];
  const std::size_t n = oh * ow;
  const std::size_t k = kernels.shape[2];
  const std::size_t cin = input.shape[0];
  const std::size_t kdim = cin * k * k;

  if (grad_kernels) {
    std::vector<double> cols;
    detail::im2col(input, k, stride, oh, ow, cols);
    for (std::size_t oc = 0; oc < cout; ++oc) {
      const double* go = grad_out.data.data() + oc * n;
      double* gk = grad_kernels->grad.data() + oc * kdim;
      for (std::size_t kidx = 0; kidx < kdim; ++kidx) {
        const double* col = cols.data() + kidx * n;
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += go[j] * col[j];
        gk[kidx] += acc;
      }
    }
  }

  if (grad_input) {
    const std::size_t w = input.shape[2];
    std::vector<double> row(n);
    for (std::size_t ic = 0; ic < cin; ++ic) {
      double* gplane = grad_input->grad.data() + ic * (input.shape[1] * w);
      for (std::size_t ky = 0; ky < k; ++ky) {
        for (std::size_t kx = 0; kx < k; ++kx) {
          const std::size_t kidx = (ic * k + ky) * k + kx;
          std::fill(row.begin(), row.end(), 0.0);
          for (std::size_t oc = 0; oc < cout; ++oc) {
            const double wgt = kernels.data[oc * kdim + kidx];
            const double* go = grad_out.data.data() + oc * n;
            for (std::size_t j = 0; j < n; ++j) row[j] += wgt * go[j];
          }
          for (std::size_t oy = 0; oy < oh; ++oy) {
            double* dst = gplane + (oy * stride + ky) * w + kx;
            const double* src = row.data() + oy * ow;
            for (std::size_t ox = 0; ox < ow; ++ox) dst[ox * stride] += src[ox];
          }
        }
      }
    }
  }
}

inline void linear_check(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  if (weight.shape.size() != 2) {
    throw ShapeError("linear: weight must be [m,n], got " + shape_str(weight.shape));
  }
  if (input.size() != weight.shape[1]) {
    throw ShapeError("linear: input size " + std::to_string(input.size()) +
                     " != weight columns " + std::to_string(weight.shape[1]));
  }
  if (bias.size() != weight.shape[0]) {
    throw ShapeError("linear: bias size mismatch");
  }
}

inline Tensor linear_forward(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  linear_check(input, weight, bias);
  const std::size_t m = weight.shape[0], n = weight.shape[1];
  Tensor out({m});
  for (std::size_t i = 0; i < m; ++i) {
    const double* wi = weight.data.data() + i * n;
    double acc = bias.data[i];
    for (std::size_t j = 0; j < n; ++j) acc += wi[j] * input.data[j];
    out.data[i] = acc;
  }
  return out;
}

inline void linear_backward(const Tensor& input, const Tensor& weight, const Tensor& grad_out,
                            Tensor* grad_input, Tensor* grad_weight, Tensor* grad_bias) {
  const std::size_t m = weight.shape[0], n = weight.shape[1];
  if (grad_bias) {
    for (std::size_t i = 0; i < m; ++i) grad_bias->grad[i] += grad_out.data[i];
  }
  if (grad_weight) {
    for (std::size_t i = 0; i < m; ++i) {
      const double g = grad_out.data[i];
      double* gw = grad_weight->grad.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) gw[j] += g * input.data[j];
    }
  }
  if (grad_input) {
    for (std::size_t i = 0; i < m; ++i) {
      const double g = grad_out.data[i];
      const double* wi = weight.data.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) grad_input->grad[j] += g * wi[j];
    }
  }
}

/// Elementwise max(0, x). The subgradient at 0 is taken as 0.
inline Tensor relu(const Tensor& input) {
  Tensor out(input.shape);
  for (std::size_t i = 0; i < input.size(); ++i) out.data[i] = std::max(0.0, input.data[i]);
  return out;
}

inline void relu_backward(const Tensor& input, const Tensor& grad_out, Tensor* grad_input) {
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input.data[i] > 0.0) grad_input->grad[i] += grad_out.data[i];
  }
}

/// x[C,H,W] + b[C], broadcast over the spatial plane.
inline Tensor channel_bias_forward(const Tensor& input, const Tensor& bias) {
  if (input.shape.size() != 3 || bias.size() != input.shape[0]) {
    throw ShapeError("channel_bias: want [C,H,W] input and [C] bias");
  }
  Tensor out(input.shape);
  const std::size_t plane = input.shape[1] * input.shape[2];
  for (std::size_t c = 0; c < input.shape[0]; ++c) {
    const double b = bias.data[c];
    const double* src = input.data.data() + c * plane;
    double* dst = out.data.data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) dst[i] = src[i] + b;
  }
  return out;
}

inline void channel_bias_backward(const Tensor& input, const Tensor& grad_out,
                                  Tensor* grad_input, Tensor* grad_bias) {
  const std::size_t plane = input.shape[1] * input.shape[2];
  for (std::size_t c = 0; c < input.shape[0]; ++c) {
    const double* go = grad_out.data.data() + c * plane;
    if (grad_bias) {
      double acc = 0.0;
      for (std::size_t i = 0; i < plane; ++i) acc += go[i];
      grad_bias->grad[c] += acc;
    }
    if (grad_input) {
      double* gi = grad_input->grad.data() + c * plane;
      for (std::size_t i = 0; i < plane; ++i) gi[i] += go[i];
    }
  }
}

}  // namespace mcpc
