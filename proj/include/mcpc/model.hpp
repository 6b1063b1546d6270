#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mcpc/image.hpp"
#include "mcpc/kernels.hpp"
#include "mcpc/optim.hpp"
#include "mcpc/rng.hpp"
#include "mcpc/tape.hpp"
#include "mcpc/tensor.hpp"

namespace mcpc {

struct NumericsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Architecture and optimizer constants. The defaults are the reference
/// configuration used by all experiments; tests may shrink them.
struct ModelConfig {
  std::size_t input_size = 100;                      // square input side, px
  std::vector<std::size_t> conv_channels = {8, 16, 32};
  std::size_t kernel_size = 5;
  std::size_t conv_stride = 2;
  std::vector<std::size_t> predictor_hidden = {16, 16};
  double init_gain = 0.5773502691896258;  // weight bound = init_gain*sqrt(3/fan_in)
  // The scalar head starts with nonnegative weights so the latent inherits
  // the monotone "amount of ink" trend of the conv features; random signs
  // would turn that trend into a random walk across feature values.
  bool head_positive = true;
  // Wider hidden init for the latent-shift MLP so the first optimizer step
  // (whose per-parameter magnitude is fixed by RMSprop's zero-state warmup)
  // moves the prediction by a useful fraction of the latent range.
  double predictor_hidden_gain = 2.886751345948129;  // 5/sqrt(3)
  // The last latent-shift layer starts at zero: the predictor is exactly
  // the identity until the first step, instead of a random distortion of
  // the same order as inter-image latent gaps.
  bool zero_final_predictor = true;
  // Binomial-blur passes applied to each conv kernel at init (RMS
  // preserved). Raw white-noise kernels alias the strided downsampling, so
  // the latent wobbles between neighboring object positions instead of
  // varying smoothly; low-pass kernels keep it locally monotone.
  std::size_t kernel_smooth_passes = 10;
  double learning_rate = 4e-4;
  double rms_decay = 0.99;
  double rms_epsilon = 1e-8;
};

/// Spatial side length entering each conv layer, then the final feature
/// map side. Throws ShapeError if a layer would shrink below the kernel.
inline std::vector<std::size_t> encoder_dims(const ModelConfig& cfg) {
  std::vector<std::size_t> dims = {cfg.input_size};
  for (std::size_t i = 0; i < cfg.conv_channels.size(); ++i) {
    const std::size_t h = dims.back();
    if (h < cfg.kernel_size) {
      throw ShapeError("conv layer " + std::to_string(i) + ": input side " + std::to_string(h) +
                       " smaller than kernel " + std::to_string(cfg.kernel_size));
    }
    dims.push_back((h - cfg.kernel_size) / cfg.conv_stride + 1);
  }
  return dims;
}

inline std::size_t encoder_flat_dim(const ModelConfig& cfg) {
  const auto dims = encoder_dims(cfg);
  const std::size_t side = dims.back();
  return cfg.conv_channels.back() * side * side;
}

struct ConvLayer {
  Tensor kernels;  // [out_channels, in_channels, k, k]
  Tensor bias;     // [out_channels]
};

struct LinearLayer {
  Tensor weight;  // [out_features, in_features]
  Tensor bias;    // [out_features]
};

/// All trainable state: the conv encoder with a scalar linear head, and
/// the residual predictor MLP (latent shift; the full predictor is
/// identity plus this network).
struct ModelParams {
  ModelConfig config;
  std::vector<ConvLayer> conv;
  LinearLayer head;
  std::vector<LinearLayer> predictor;
  std::uint64_t init_seed = 0;

  /// Visits every parameter tensor in a fixed canonical order.
  template <typename F>
  void for_each_param(F&& f) {
    for (ConvLayer& c : conv) {
      f(c.kernels);
      f(c.bias);
    }
    f(head.weight);
    f(head.bias);
    for (LinearLayer& l : predictor) {
      f(l.weight);
      f(l.bias);
    }
  }

  template <typename F>
  void for_each_param(F&& f) const {
    for (const ConvLayer& c : conv) {
      f(c.kernels);
      f(c.bias);
    }
    f(head.weight);
    f(head.bias);
    for (const LinearLayer& l : predictor) {
      f(l.weight);
      f(l.bias);
    }
  }

  std::size_t num_params() const {
    std::size_t n = 0;
    for_each_param([&n](const Tensor& t) { n += t.size(); });
    return n;
  }
};

namespace detail {

inline void init_uniform(Tensor& t, std::size_t fan_in, double gain, Rng& rng) {
  const double bound = gain * std::sqrt(3.0 / static_cast<double>(fan_in));
  for (double& v : t.data) v = rng.uniform(-bound, bound);
}

/// In-place 3x3 binomial blur of one k x k patch, zero-padded at the
/// border, repeated `passes` times; the patch is rescaled afterward so its
/// root-mean-square value is unchanged.
inline void smooth_patch(double* patch, std::size_t k, std::size_t passes) {
  if (passes == 0 || k == 0) return;
  const double w[3] = {0.25, 0.5, 0.25};
  std::vector<double> tmp(k * k);
  double before = 0.0;
  for (std::size_t e = 0; e < k * k; ++e) before += patch[e] * patch[e];
  for (std::size_t p = 0; p < passes; ++p) {
    for (std::size_t y = 0; y < k; ++y) {
      for (std::size_t x = 0; x < k; ++x) {
        double acc = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const std::ptrdiff_t yy = static_cast<std::ptrdiff_t>(y) + dy;
            const std::ptrdiff_t xx = static_cast<std::ptrdiff_t>(x) + dx;
            if (yy < 0 || xx < 0 || yy >= static_cast<std::ptrdiff_t>(k) ||
                xx >= static_cast<std::ptrdiff_t>(k)) {
              continue;
            }
            acc += w[dy + 1] * w[dx + 1] * patch[yy * k + xx];
          }
        }
        tmp[y * k + x] = acc;
      }
    }
    std::copy(tmp.begin(), tmp.end(), patch);
  }
  double after = 0.0;
  for (std::size_t e = 0; e < k * k; ++e) after += patch[e] * patch[e];
  if (after > 0.0) {
    const double scale = std::sqrt(before / after);
    for (std::size_t e = 0; e < k * k; ++e) patch[e] *= scale;
  }
}

inline void smooth_kernels(Tensor& kernels, std::size_t passes) {
  const std::size_t planes = kernels.shape[0] * kernels.shape[1];
  const std::size_t k = kernels.shape[2];
  for (std::size_t p = 0; p < planes; ++p) smooth_patch(&kernels.data[p * k * k], k, passes);
}

}  // namespace detail

/// Fresh model: weights uniform in ±gain*sqrt(3/fan_in), biases zero.
/// The head is rectified to nonnegative weights when head_positive is set,
/// and the final latent-shift layer is cleared when zero_final_predictor is
/// set (see ModelConfig). The random stream is consumed identically under
/// every flag combination. Deterministic given (config, seed).
inline ModelParams init_model(const ModelConfig& cfg, std::uint64_t seed) {
  ModelParams m;
  m.config = cfg;
  m.init_seed = seed;
  Rng rng(seed);

  std::size_t in_channels = 1;
  for (std::size_t ch : cfg.conv_channels) {
    ConvLayer layer;
    layer.kernels = Tensor({ch, in_channels, cfg.kernel_size, cfg.kernel_size});
    layer.bias = Tensor({ch});
    detail::init_uniform(layer.kernels, in_channels * cfg.kernel_size * cfg.kernel_size,
                         cfg.init_gain, rng);
    detail::smooth_kernels(layer.kernels, cfg.kernel_smooth_passes);
    m.conv.push_back(std::move(layer));
    in_channels = ch;
  }

  const std::size_t flat = encoder_flat_dim(cfg);
  m.head.weight = Tensor({1, flat});
  m.head.bias = Tensor({1});
  detail::init_uniform(m.head.weight, flat, cfg.init_gain, rng);
  if (cfg.head_positive) {
    for (double& v : m.head.weight.data) v = std::fabs(v);
  }

  std::size_t in_features = 1;
  for (std::size_t h : cfg.predictor_hidden) {
    LinearLayer l;
    l.weight = Tensor({h, in_features});
    l.bias = Tensor({h});
    detail::init_uniform(l.weight, in_features, cfg.predictor_hidden_gain, rng);
    m.predictor.push_back(std::move(l));
    in_features = h;
  }
  LinearLayer out;
  out.weight = Tensor({1, in_features});
  out.bias = Tensor({1});
  detail::init_uniform(out.weight, in_features, cfg.init_gain, rng);
  if (cfg.zero_final_predictor) {
    for (double& v : out.weight.data) v = 0.0;
  }
  m.predictor.push_back(std::move(out));
  return m;
}

/// Optimizer state with the model's configured constants; per-parameter
/// accumulators start at zero and are allocated on first use.
inline RmsPropState make_optimizer(const ModelConfig& cfg) {
  RmsPropState s;
  s.decay = cfg.rms_decay;
  s.epsilon = cfg.rms_epsilon;
  return s;
}

/// Scalar latent of one image (plain forward, no gradients).
inline double encode(const ModelParams& m, const Image& img) {
  const ModelConfig& cfg = m.config;
  if (img.height != cfg.input_size || img.width != cfg.input_size) {
    throw ShapeError("encode: image is " + std::to_string(img.height) + "x" +
                     std::to_string(img.width) + ", expected " + std::to_string(cfg.input_size) +
                     "x" + std::to_string(cfg.input_size));
  }
  Tensor x = image_to_tensor(img);
  for (const ConvLayer& c : m.conv) {
    x = conv2d_forward(x, c.kernels, cfg.conv_stride);
    x = channel_bias_forward(x, c.bias);
    x = relu(x);
  }
  Tensor flat({x.size()}, x.data);
  const Tensor out = linear_forward(flat, m.head.weight, m.head.bias);
  return out.data[0];
}

/// The residual network's output for latent z (the latent shift).
inline double latent_shift(const ModelParams& m, double z) {
  Tensor h({1}, {z});
  for (std::size_t i = 0; i < m.predictor.size(); ++i) {
    h = linear_forward(h, m.predictor[i].weight, m.predictor[i].bias);
    if (i + 1 < m.predictor.size()) h = relu(h);
  }
  return h.data[0];
}

/// Predicted next latent: z plus the residual shift.
inline double predict_latent(const ModelParams& m, double z) {
  return z + latent_shift(m, z);
}

/// Squared error between the prediction from image a and image b's latent.
inline double prediction_error(const ModelParams& m, const Image& a, const Image& b) {
  const double za = encode(m, a);
  const double zb = encode(m, b);
  const double d = predict_latent(m, za) - zb;
  return d * d;
}

struct LossReport {
  double loss = 0.0;
  std::vector<double> latents;               // z_j per image
  std::vector<double> predicted;             // predicted next latent from image j
  std::vector<std::vector<double>> errors;   // errors[a][b], diagonal unused (0)
};

/// Contrastive loss from a full pairwise error matrix: the mean over
/// anchors j of err[j][j+1] + logsumexp_{j' != j}(-err[j][j']).
inline double contrastive_from_errors(const std::vector<std::vector<double>>& errors) {
  const std::size_t k = errors.size();
  if (k < 2) throw ShapeError("contrastive loss needs a sequence of at least 2");
  double total = 0.0;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t jp = 0; jp < k; ++jp) {
      if (jp != j) m = std::max(m, -errors[j][jp]);
    }
    double s = 0.0;
    for (std::size_t jp = 0; jp < k; ++jp) {
      if (jp != j) s += std::exp(-errors[j][jp] - m);
    }
    total += errors[j][j + 1] + (m + std::log(s));
  }
  return total / static_cast<double>(k - 1);
}

/// Loss and diagnostics on a sequence (plain forward, no gradients).
inline LossReport infonce_loss(const ModelParams& m, std::span<const Image> sequence) {
  const std::size_t k = sequence.size();
  if (k < 2) throw ShapeError("contrastive loss needs a sequence of at least 2");
  LossReport r;
  r.latents.resize(k);
  r.predicted.resize(k);
  for (std::size_t j = 0; j < k; ++j) r.latents[j] = encode(m, sequence[j]);
  for (std::size_t j = 0; j < k; ++j) r.predicted[j] = predict_latent(m, r.latents[j]);
  r.errors.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b) continue;
      const double d = r.predicted[a] - r.latents[b];
      r.errors[a][b] = d * d;
    }
  }
  r.loss = contrastive_from_errors(r.errors);
  return r;
}

/// Ids of the tape nodes a loss forward pass produces. relu_preacts lists
/// every ReLU input in the graph (used for finite-difference hygiene).
struct LossGraph {
  Tape::Id loss = Tape::kNoId;
  std::vector<Tape::Id> z;                    // latents, one per image
  std::vector<Tape::Id> predicted;            // predicted next latent per anchor j < K-1
  std::vector<std::vector<Tape::Id>> errors;  // errors[j][jp] for anchors; kNoId on diagonal
  std::vector<Tape::Id> relu_preacts;
};

namespace detail {

struct ParamIds {
  std::vector<std::pair<Tape::Id, Tape::Id>> conv;  // (kernels, bias)
  std::pair<Tape::Id, Tape::Id> head;
  std::vector<std::pair<Tape::Id, Tape::Id>> predictor;
};

inline ParamIds register_params(Tape& tape, ModelParams& m) {
  ParamIds ids;
  for (ConvLayer& c : m.conv) ids.conv.push_back({tape.param(c.kernels), tape.param(c.bias)});
  ids.head = {tape.param(m.head.weight), tape.param(m.head.bias)};
  for (LinearLayer& l : m.predictor) {
    ids.predictor.push_back({tape.param(l.weight), tape.param(l.bias)});
  }
  return ids;
}

inline Tape::Id encode_on_tape(Tape& tape, const ParamIds& ids, const ModelConfig& cfg,
                               const Image& img, std::vector<Tape::Id>& relu_preacts) {
  Tape::Id x = tape.input(image_to_tensor(img));
  for (const auto& [kernels, bias] : ids.conv) {
    x = tape.conv2d(x, kernels, cfg.conv_stride);
    x = tape.channel_bias(x, bias);
    relu_preacts.push_back(x);
    x = tape.relu(x);
  }
  x = tape.flatten(x);
  x = tape.linear(x, ids.head.first, ids.head.second);
  return tape.to_scalar(x);
}

inline Tape::Id predict_on_tape(Tape& tape, const ParamIds& ids, Tape::Id z,
                                std::vector<Tape::Id>& relu_preacts) {
  Tape::Id h = tape.flatten(z);
  for (std::size_t i = 0; i < ids.predictor.size(); ++i) {
    h = tape.linear(h, ids.predictor[i].first, ids.predictor[i].second);
    if (i + 1 < ids.predictor.size()) {
      relu_preacts.push_back(h);
      h = tape.relu(h);
    }
  }
  return tape.add(z, tape.to_scalar(h));
}

}  // namespace detail

/// Builds the full differentiable loss graph for one sequence. Parameter
/// gradients land in the model's tensors after Tape::backward(graph.loss).
inline LossGraph build_loss_graph(Tape& tape, ModelParams& m, std::span<const Image> sequence) {
  const std::size_t k = sequence.size();
  if (k < 2) throw ShapeError("contrastive loss needs a sequence of at least 2");
  const detail::ParamIds ids = detail::register_params(tape, m);

  LossGraph g;
  for (std::size_t j = 0; j < k; ++j) {
    g.z.push_back(detail::encode_on_tape(tape, ids, m.config, sequence[j], g.relu_preacts));
  }
  for (std::size_t j = 0; j + 1 < k; ++j) {
    g.predicted.push_back(detail::predict_on_tape(tape, ids, g.z[j], g.relu_preacts));
  }
  g.errors.assign(k - 1, std::vector<Tape::Id>(k, Tape::kNoId));
  for (std::size_t j = 0; j + 1 < k; ++j) {
    for (std::size_t jp = 0; jp < k; ++jp) {
      if (jp == j) continue;
      g.errors[j][jp] = tape.square(tape.sub(g.predicted[j], g.z[jp]));
    }
  }
  std::vector<Tape::Id> terms;
  for (std::size_t j = 0; j + 1 < k; ++j) {
    std::vector<Tape::Id> negated;
    for (std::size_t jp = 0; jp < k; ++jp) {
      if (jp != j) negated.push_back(tape.neg(g.errors[j][jp]));
    }
    terms.push_back(tape.add(g.errors[j][j + 1], tape.logsumexp(std::move(negated))));
  }
  g.loss = tape.mean(std::move(terms));
  return g;
}

namespace detail {

inline void ensure_optimizer_state(RmsPropState& opt, ModelParams& m) {
  if (opt.mean_sq.empty()) {
    m.for_each_param([&opt](Tensor& t) { opt.mean_sq.push_back(Tensor(t.shape)); });
    return;
  }
  std::size_t i = 0;
  bool ok = true;
  m.for_each_param([&](Tensor& t) {
    if (i >= opt.mean_sq.size() || !opt.mean_sq[i].same_shape(t)) ok = false;
    ++i;
  });
  if (!ok || i != opt.mean_sq.size()) {
    throw ShapeError("optimizer state does not match the model's parameters");
  }
}

}  // namespace detail

/// One forward, one backward, one RMSprop update on every parameter.
/// Returns the loss before the update. Throws NumericsError on a
/// non-finite loss.
inline double optimize_step(ModelParams& m, std::span<const Image> sequence, RmsPropState& opt,
                            double lr) {
  m.for_each_param([](Tensor& t) { t.zero_grad(); });
  Tape tape;
  const LossGraph g = build_loss_graph(tape, m, sequence);
  const double loss = tape.value(g.loss).value();
  if (!std::isfinite(loss)) {
    throw NumericsError("optimize_step: non-finite loss (" + std::to_string(loss) +
                        ") on a sequence of " + std::to_string(sequence.size()) + " images");
  }
  tape.backward(g.loss);
  detail::ensure_optimizer_state(opt, m);
  std::size_t i = 0;
  m.for_each_param([&](Tensor& t) { rmsprop_step(t, opt.mean_sq[i++], opt.decay, opt.epsilon, lr); });
  return loss;
}

inline double optimize_step(ModelParams& m, std::span<const Image> sequence, RmsPropState& opt) {
  return optimize_step(m, sequence, opt, m.config.learning_rate);
}

}  // namespace mcpc
