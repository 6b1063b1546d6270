#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "mcpc/tensor.hpp"

namespace mcpc {

/// RMSprop: v <- decay*v + (1-decay)*g^2;  p <- p - lr*g/(sqrt(v) + epsilon).
/// The running averages are kept per parameter tensor, in registration order.
struct RmsPropState {
  double decay = 0.99;
  double epsilon = 1e-8;
  std::vector<Tensor> mean_sq;
};

inline void rmsprop_step(std::span<double> params, std::span<const double> grads,
                         std::span<double> mean_sq, double decay, double epsilon,
                         double lr) {
  if (params.size() != grads.size() || params.size() != mean_sq.size()) {
    throw ShapeError("rmsprop_step: parameter/gradient/state sizes differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    mean_sq[i] = decay * mean_sq[i] + (1.0 - decay) * g * g;
    params[i] -= lr * g / (std::sqrt(mean_sq[i]) + epsilon);
  }
}

inline void rmsprop_step(Tensor& param, Tensor& state, double decay, double epsilon,
                         double lr) {
  rmsprop_step(std::span<double>(param.data), std::span<const double>(param.grad),
               std::span<double>(state.data), decay, epsilon, lr);
}

}  // namespace mcpc
