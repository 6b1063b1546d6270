#include <chrono>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "mcpc/gradcheck.hpp"
#include "mcpc/model.hpp"
#include "mcpc/rng.hpp"
#include "mcpc/tape.hpp"

#include "oracles.hpp"

using namespace mcpc;

TEST_CASE("linear tape: loss = w*x has grad(w) = x") {
  Tensor w({1, 1}, {3.0});
  Tensor b({1});
  Tape tape;
  const Tape::Id wid = tape.param(w);
  const Tape::Id bid = tape.param(b);
  const Tape::Id x = tape.input(Tensor({1}, {2.0}));
  const Tape::Id y = tape.to_scalar(tape.linear(x, wid, bid));
  tape.backward(y);
  REQUIRE(w.grad[0] == 2.0);
  REQUIRE(b.grad[0] == 1.0);
}

TEST_CASE("dead relu has zero gradient") {
  Tensor w({1}, {-1.0});
  Tape tape;
  const Tape::Id wid = tape.param(w);
  const Tape::Id y = tape.to_scalar(tape.relu(wid));
  tape.backward(y);
  REQUIRE(w.grad[0] == 0.0);
}

TEST_CASE("backward twice throws") {
  Tensor w({1}, {1.0});
  Tape tape;
  const Tape::Id y = tape.to_scalar(tape.param(w));
  tape.backward(y);
  REQUIRE_THROWS_AS(tape.backward(y), std::logic_error);
}

TEST_CASE("backward from a non-scalar throws") {
  Tensor w({2}, {1.0, 2.0});
  Tape tape;
  const Tape::Id id = tape.param(w);
  REQUIRE_THROWS_AS(tape.backward(id), ShapeError);
}

TEST_CASE("scalar op composition matches finite differences") {
  // loss = mean(square(a - b), square(a + b), logsumexp(-a, -b))
  auto loss_value = [](double av, double bv) {
    const double t1 = (av - bv) * (av - bv);
    const double t2 = (av + bv) * (av + bv);
    const double m = std::max(-av, -bv);
    const double t3 = m + std::log(std::exp(-av - m) + std::exp(-bv - m));
    return (t1 + t2 + t3) / 3.0;
  };
  auto build = [](Tape& tape, Tensor& a, Tensor& b) {
    const Tape::Id aid = tape.to_scalar(tape.param(a));
    const Tape::Id bid = tape.to_scalar(tape.param(b));
    const Tape::Id t1 = tape.square(tape.sub(aid, bid));
    const Tape::Id t2 = tape.square(tape.add(aid, bid));
    const Tape::Id t3 = tape.logsumexp({tape.neg(aid), tape.neg(bid)});
    return tape.mean({t1, t2, t3});
  };

  Tensor a({1}, {0.7});
  Tensor b({1}, {-0.3});
  Tape tape;
  const Tape::Id loss = build(tape, a, b);
  REQUIRE(tape.value(loss).value() == Catch::Approx(loss_value(0.7, -0.3)).margin(1e-12));
  tape.backward(loss);

  const double h = 1e-6;
  const double fda = (loss_value(0.7 + h, -0.3) - loss_value(0.7 - h, -0.3)) / (2 * h);
  const double fdb = (loss_value(0.7, -0.3 + h) - loss_value(0.7, -0.3 - h)) / (2 * h);
  REQUIRE(a.grad[0] == Catch::Approx(fda).margin(1e-8));
  REQUIRE(b.grad[0] == Catch::Approx(fdb).margin(1e-8));
}

TEST_CASE("logsumexp survives large magnitudes") {
  Tensor a({1}, {800.0});
  Tensor b({1}, {1.0});
  Tape tape;
  const Tape::Id loss =
      tape.logsumexp({tape.to_scalar(tape.param(a)), tape.to_scalar(tape.param(b))});
  REQUIRE(std::isfinite(tape.value(loss).value()));
  REQUIRE(tape.value(loss).value() == Catch::Approx(800.0).margin(1e-9));
  tape.backward(loss);
  REQUIRE(a.grad[0] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("tape loss equals the plain forward loss") {
  Rng rng(31);
  ModelConfig cfg;
  cfg.input_size = 12;
  cfg.conv_channels = {3, 4};
  cfg.kernel_size = 3;
  cfg.predictor_hidden = {4};
  cfg.zero_final_predictor = false;
  cfg.kernel_smooth_passes = 0;
  ModelParams m = init_model(cfg, 999);

  std::vector<Image> seq(5, Image(12, 12));
  for (Image& img : seq) {
    for (double& px : img.pixels) px = rng.uniform();
  }

  Tape tape;
  const LossGraph g = build_loss_graph(tape, m, seq);
  const double plain = infonce_loss(m, seq).loss;
  REQUIRE(tape.value(g.loss).value() == Catch::Approx(plain).margin(1e-12));
}

TEST_CASE("full-model gradcheck on a small sample") {
  GradCheckOptions opt;
  opt.seeds = 10;
  const GradCheckReport rep = run_gradcheck(opt, 4242);
  INFO(rep.worst);
  CHECK(rep.seeds_run == 10);
  CHECK(rep.params_checked > 1000);
  REQUIRE(rep.passed);
  REQUIRE(rep.max_rel_err < 1e-3);
}
