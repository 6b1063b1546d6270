#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcpc/image.hpp"
#include "mcpc/model.hpp"
#include "mcpc/rng.hpp"
#include "mcpc/tape.hpp"

namespace mcpc {

struct GradCheckOptions {
  std::size_t seeds = 100;
  std::size_t sequence_length = 5;
  double fd_step = 1e-4;
  double tolerance = 1e-3;
};

struct GradCheckReport {
  std::size_t seeds_run = 0;
  std::size_t params_checked = 0;
  std::size_t kink_skips = 0;  // params whose FD probes straddle a ReLU kink
  double max_rel_err = 0.0;
  bool passed = false;
  std::string worst;  // where the max error occurred
};

/// Small random architecture: the full layer composition at toy size, so
/// finite differences over every parameter stay fast. Generic signed
/// weights everywhere — a zeroed final predictor layer would leave the
/// hidden-layer gradients identically zero and the check vacuous there.
inline ModelConfig random_small_config(Rng& rng) {
  ModelConfig cfg;
  cfg.kernel_size = 3;
  cfg.conv_stride = 2;
  cfg.input_size = 8 + rng.uniform_index(9);  // 8..16
  const std::size_t n_conv = 1 + rng.uniform_index(2);
  cfg.conv_channels.clear();
  for (std::size_t i = 0; i < n_conv; ++i) {
    cfg.conv_channels.push_back(2 + rng.uniform_index(3));  // 2..4 channels
  }
  cfg.predictor_hidden = {2 + rng.uniform_index(3)};
  cfg.head_positive = false;
  cfg.zero_final_predictor = false;
  cfg.predictor_hidden_gain = cfg.init_gain;
  cfg.kernel_smooth_passes = 0;
  return cfg;
}

namespace detail {

/// Loss plus the on/off pattern of every ReLU unit in the forward pass.
inline std::pair<double, std::vector<char>> loss_and_relu_mask(ModelParams& m,
                                                               std::span<const Image> seq) {
  Tape tape;
  const LossGraph g = build_loss_graph(tape, m, seq);
  std::vector<char> mask;
  for (Tape::Id id : g.relu_preacts) {
    for (double v : tape.value(id).data) mask.push_back(v > 0.0 ? 1 : 0);
  }
  return {tape.value(g.loss).value(), std::move(mask)};
}

}  // namespace detail

/// Central finite differences vs the tape's analytic gradients over every
/// parameter of randomly drawn small models. Parameters whose two FD
/// probes see different ReLU activation patterns are skipped (the loss is
/// not differentiable across a kink) and counted in the report.
inline GradCheckReport run_gradcheck(const GradCheckOptions& opt, std::uint64_t master_seed) {
  GradCheckReport rep;
  const double h = opt.fd_step;

  for (std::size_t s = 0; s < opt.seeds; ++s) {
    Rng rng = derive_rng(master_seed, "gradcheck", s);
    const ModelConfig cfg = random_small_config(rng);
    ModelParams m = init_model(cfg, derive_seed(master_seed, "gradcheck-model", s));

    std::vector<Image> seq(opt.sequence_length, Image(cfg.input_size, cfg.input_size));
    for (Image& img : seq) {
      for (double& px : img.pixels) px = rng.uniform();
    }

    m.for_each_param([](Tensor& t) { t.zero_grad(); });
    Tape tape;
    const LossGraph g = build_loss_graph(tape, m, seq);
    tape.backward(g.loss);

    std::vector<Tensor*> tensors;
    m.for_each_param([&tensors](Tensor& t) { tensors.push_back(&t); });

    for (std::size_t ti = 0; ti < tensors.size(); ++ti) {
      Tensor& t = *tensors[ti];
      for (std::size_t i = 0; i < t.size(); ++i) {
        const double analytic = t.grad[i];
        const double orig = t.data[i];
        t.data[i] = orig + h;
        const auto [loss_plus, mask_plus] = detail::loss_and_relu_mask(m, seq);
        t.data[i] = orig - h;
        const auto [loss_minus, mask_minus] = detail::loss_and_relu_mask(m, seq);
        t.data[i] = orig;
        if (mask_plus != mask_minus) {
          ++rep.kink_skips;
          continue;
        }
        const double fd = (loss_plus - loss_minus) / (2.0 * h);
        const double rel =
            std::abs(analytic - fd) / std::max({std::abs(analytic), std::abs(fd), 1e-6});
        ++rep.params_checked;
        if (rel > rep.max_rel_err) {
          rep.max_rel_err = rel;
          rep.worst = "seed " + std::to_string(s) + ", tensor " + std::to_string(ti) +
                      ", element " + std::to_string(i) + " (analytic " + std::to_string(analytic) +
                      ", fd " + std::to_string(fd) + ")";
        }
      }
    }
    ++rep.seeds_run;
  }
  rep.passed = rep.params_checked > 0 && rep.max_rel_err < opt.tolerance;
  return rep;
}

}  // namespace mcpc
