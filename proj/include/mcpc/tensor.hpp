#pragma once

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcpc {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

inline std::size_t shape_size(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

/// Dense row-major tensor of doubles with a same-shape gradient buffer.
/// A rank-0 shape ({}) is a scalar with one element.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;

  Tensor() : data(1, 0.0), grad(1, 0.0) {}

  explicit Tensor(std::vector<std::size_t> s)
      : shape(std::move(s)),
        data(shape_size(shape), 0.0),
        grad(shape_size(shape), 0.0) {}

  Tensor(std::vector<std::size_t> s, std::vector<double> values)
      : shape(std::move(s)), data(std::move(values)), grad(data.size(), 0.0) {
    if (data.size() != shape_size(shape)) {
      throw ShapeError("tensor data length does not match shape");
    }
  }

  static Tensor zeros(std::vector<std::size_t> shape) { return Tensor(std::move(shape)); }

  static Tensor scalar(double v) {
    Tensor t;
    t.data[0] = v;
    return t;
  }

  std::size_t size() const { return data.size(); }

  double& operator[](std::size_t i) { return data[i]; }
  double operator[](std::size_t i) const { return data[i]; }

  double value() const { return data[0]; }

  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

inline std::string shape_str(const std::vector<std::size_t>& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

}  // namespace mcpc
