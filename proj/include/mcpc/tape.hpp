#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <vector>

#include "mcpc/kernels.hpp"
#include "mcpc/tensor.hpp"

namespace mcpc {

/// Reverse-mode gradient tape. A tape records one forward computation and is
/// discarded after a single backward pass; parameters registered with param()
/// receive accumulated gradients in their own grad buffers.
///
/// Node values for interior ops are owned by the tape; ops call the kernels
/// in kernels.hpp for their forward math.
class Tape {
 public:
  using Id = std::uint32_t;
  static constexpr Id kNoId = ~Id{0};

  /// External trainable tensor. Gradients accumulate into t.grad.
  Id param(Tensor& t) {
    nodes_.push_back(Node{});
    Node& n = nodes_.back();
    n.external = &t;
    n.needs_grad = true;
    return static_cast<Id>(nodes_.size() - 1);
  }

  /// Constant input; no gradient is propagated into it.
  Id input(Tensor value) {
    Id id = fresh(std::move(value));
    nodes_[id].needs_grad = false;
    return id;
  }

  const Tensor& value(Id id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.owned;
  }

  Id conv2d(Id x, Id kernels, std::size_t stride) {
    Id out = fresh(conv2d_forward(value(x), value(kernels), stride));
    set_back(out, {x, kernels}, [stride](Tape& t, const Node& self) {
      const Tensor grad_out = self.grad_as_tensor();
      Tensor* gx = t.grad_target(self.ins[0]);
      Tensor* gk = t.grad_target(self.ins[1]);
      conv2d_backward(t.value(self.ins[0]), t.value(self.ins[1]), stride, grad_out, gx, gk);
    });
    return out;
  }

  Id channel_bias(Id x, Id bias) {
    Id out = fresh(channel_bias_forward(value(x), value(bias)));
    set_back(out, {x, bias}, [](Tape& t, const Node& self) {
      const Tensor grad_out = self.grad_as_tensor();
      channel_bias_backward(t.value(self.ins[0]), grad_out, t.grad_target(self.ins[0]),
                            t.grad_target(self.ins[1]));
    });
    return out;
  }

  Id relu(Id x) {
    Id out = fresh(mcpc::relu(value(x)));
    set_back(out, {x}, [](Tape& t, const Node& self) {
      Tensor* gx = t.grad_target(self.ins[0]);
      if (!gx) return;
      const Tensor grad_out = self.grad_as_tensor();
      relu_backward(t.value(self.ins[0]), grad_out, gx);
    });
    return out;
  }

  Id linear(Id x, Id weight, Id bias) {
    Id out = fresh(linear_forward(value(x), value(weight), value(bias)));
    set_back(out, {x, weight, bias}, [](Tape& t, const Node& self) {
      const Tensor grad_out = self.grad_as_tensor();
      linear_backward(t.value(self.ins[0]), t.value(self.ins[1]), grad_out,
                      t.grad_target(self.ins[0]), t.grad_target(self.ins[1]),
                      t.grad_target(self.ins[2]));
    });
    return out;
  }

  Id flatten(Id x) {
    Tensor v({value(x).size()}, value(x).data);
    Id out = fresh(std::move(v));
    set_back(out, {x}, [](Tape& t, const Node& self) {
      Tensor* gx = t.grad_target(self.ins[0]);
      if (!gx) return;
      for (std::size_t i = 0; i < self.grad().size(); ++i) gx->grad[i] += self.grad()[i];
    });
    return out;
  }

  /// Size-1 tensor of any rank -> rank-0 scalar.
  Id to_scalar(Id x) {
    if (value(x).size() != 1) throw ShapeError("to_scalar: tensor has more than one element");
    Id out = fresh(Tensor::scalar(value(x).data[0]));
    set_back(out, {x}, [](Tape& t, const Node& self) {
      Tensor* gx = t.grad_target(self.ins[0]);
      if (gx) gx->grad[0] += self.grad()[0];
    });
    return out;
  }

  Id add(Id a, Id b) { return binary(a, b, /*sign_b=*/+1.0); }
  Id sub(Id a, Id b) { return binary(a, b, /*sign_b=*/-1.0); }

  Id square(Id x) {
    Tensor v(value(x).shape);
    for (std::size_t i = 0; i < v.size(); ++i) v.data[i] = value(x).data[i] * value(x).data[i];
    Id out = fresh(std::move(v));
    set_back(out, {x}, [](Tape& t, const Node& self) {
      Tensor* gx = t.grad_target(self.ins[0]);
      if (!gx) return;
      const Tensor& xv = t.value(self.ins[0]);
      for (std::size_t i = 0; i < xv.size(); ++i) {
        gx->grad[i] += 2.0 * xv.data[i] * self.grad()[i];
      }
    });
    return out;
  }

  Id neg(Id x) {
    Tensor v(value(x).shape);
    for (std::size_t i = 0; i < v.size(); ++i) v.data[i] = -value(x).data[i];
    Id out = fresh(std::move(v));
    set_back(out, {x}, [](Tape& t, const Node& self) {
      Tensor* gx = t.grad_target(self.ins[0]);
      if (!gx) return;
      for (std::size_t i = 0; i < self.grad().size(); ++i) gx->grad[i] -= self.grad()[i];
    });
    return out;
  }

  /// log(sum_i exp(x_i)) over scalar nodes, max-stabilized.
  Id logsumexp(std::vector<Id> xs) {
    if (xs.empty()) throw ShapeError("logsumexp: empty input");
    double m = value(xs[0]).value();
    for (Id id : xs) m = std::max(m, value(id).value());
    double s = 0.0;
    for (Id id : xs) s += std::exp(value(id).value() - m);
    Id out = fresh(Tensor::scalar(m + std::log(s)));
    set_back(out, std::move(xs), [m, s](Tape& t, const Node& self) {
      const double g = self.grad()[0];
      for (Id in : self.ins) {
        Tensor* gx = t.grad_target(in);
        if (gx) gx->grad[0] += g * std::exp(t.value(in).value() - m) / s;
      }
    });
    return out;
  }

  /// Arithmetic mean of scalar nodes.
  Id mean(std::vector<Id> xs) {
    if (xs.empty()) throw ShapeError("mean: empty input");
    double s = 0.0;
    for (Id id : xs) s += value(id).value();
    const double inv_n = 1.0 / static_cast<double>(xs.size());
    Id out = fresh(Tensor::scalar(s * inv_n));
    set_back(out, std::move(xs), [inv_n](Tape& t, const Node& self) {
      const double g = self.grad()[0] * inv_n;
      for (Id in : self.ins) {
        Tensor* gx = t.grad_target(in);
        if (gx) gx->grad[0] += g;
      }
    });
    return out;
  }

  /// Runs the backward pass from a scalar loss node. Gradients accumulate
  /// into node buffers and registered parameters; a tape can run backward
  /// only once (rebuild the graph to differentiate again).
  void backward(Id loss) {
    if (backward_done_) {
      throw std::logic_error("Tape::backward called twice; rebuild the forward graph");
    }
    if (value(loss).size() != 1) throw ShapeError("backward: loss must be a scalar");
    backward_done_ = true;
    grad_of(loss)[0] = 1.0;
    for (Id id = loss + 1; id-- > 0;) {
      const Node& n = nodes_[id];
      if (n.back && n.needs_grad) n.back(*this, n);
    }
  }

  std::size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    Tensor* external = nullptr;
    std::vector<Id> ins;
    std::function<void(Tape&, const Node&)> back;
    bool needs_grad = true;

    const std::vector<double>& grad() const {
      return external ? external->grad : owned.grad;
    }
    /// Copy of this node's gradient packaged as tensor data, for the kernels'
    /// grad_out parameters.
    Tensor grad_as_tensor() const {
      const Tensor& v = external ? *external : owned;
      Tensor g(v.shape);
      g.data = grad();
      return g;
    }
  };

  Id fresh(Tensor value) {
    nodes_.push_back(Node{});
    nodes_.back().owned = std::move(value);
    return static_cast<Id>(nodes_.size() - 1);
  }

  void set_back(Id id, std::vector<Id> ins, std::function<void(Tape&, const Node&)> fn) {
    Node& n = nodes_[id];
    bool any = false;
    for (Id in : ins) any = any || nodes_[in].needs_grad;
    n.needs_grad = any;
    n.ins = std::move(ins);
    n.back = std::move(fn);
  }

  /// Where to accumulate a node's gradient, or null if it does not need one.
  Tensor* grad_target(Id id) {
    Node& n = nodes_[id];
    if (!n.needs_grad) return nullptr;
    return n.external ? n.external : &n.owned;
  }

  std::vector<double>& grad_of(Id id) {
    Node& n = nodes_[id];
    return n.external ? n.external->grad : n.owned.grad;
  }

  Id binary(Id a, Id b, double sign_b) {
    const Tensor& va = value(a);
    const Tensor& vb = value(b);
    if (!va.same_shape(vb)) throw ShapeError("elementwise op: shape mismatch");
    Tensor v(va.shape);
    for (std::size_t i = 0; i < v.size(); ++i) v.data[i] = va.data[i] + sign_b * vb.data[i];
    Id out = fresh(std::move(v));
    set_back(out, {a, b}, [sign_b](Tape& t, const Node& self) {
      Tensor* ga = t.grad_target(self.ins[0]);
      Tensor* gb = t.grad_target(self.ins[1]);
      const auto& g = self.grad();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (ga) ga->grad[i] += g[i];
        if (gb) gb->grad[i] += sign_b * g[i];
      }
    });
    return out;
  }

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace mcpc
