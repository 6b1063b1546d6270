#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcpc/features.hpp"
#include "mcpc/image.hpp"
#include "mcpc/model.hpp"
#include "mcpc/parallel.hpp"
#include "mcpc/rng.hpp"
#include "mcpc/stats.hpp"
#include "mcpc/testgen.hpp"

namespace mcpc {

// ---------------------------------------------------------------------------
// Single-test solving

struct SolveOutcome {
  int chosen = 0;
  std::array<double, 4> scores{};  // error of predicting each choice from image 5
  double step_loss = 0.0;
};

namespace detail {

/// Index of the smallest score; ties go to the lowest index.
template <std::size_t N>
inline int argmin_index(const std::array<double, N>& scores) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(N); ++i) {
    if (scores[i] < scores[best]) best = i;
  }
  return best;
}

}  // namespace detail

/// One optimization step on the 5 sequence images, then pick the choice
/// whose latent is closest to the prediction from image 5. The model and
/// optimizer state are advanced by the step.
inline SolveOutcome solve_test(const IntelligenceTest& test, ModelParams& m, RmsPropState& opt) {
  SolveOutcome out;
  out.step_loss = optimize_step(m, std::span<const Image>(test.sequence), opt);
  const double z_last = encode(m, test.sequence.back());
  const double predicted = predict_latent(m, z_last);
  for (int c = 0; c < kNumChoices; ++c) {
    const double d = predicted - encode(m, test.choices[c]);
    const double score = d * d;
    if (!std::isfinite(score)) {
      throw NumericsError("solve_test: non-finite score for choice " + std::to_string(c));
    }
    out.scores[c] = score;
  }
  out.chosen = detail::argmin_index(out.scores);
  return out;
}

/// Zero-episode protocol: a freshly initialized model solves the test.
inline SolveOutcome solve_test_fresh(const IntelligenceTest& test, const ModelConfig& cfg,
                                     std::uint64_t model_seed) {
  ModelParams m = init_model(cfg, model_seed);
  RmsPropState opt = make_optimizer(cfg);
  return solve_test(test, m, opt);
}

// ---------------------------------------------------------------------------
// Condition evaluation

struct ExperimentResult {
  std::string condition;
  std::size_t n = 0;
  double accuracy = 0.0;
  double ci95 = 0.0;
  std::uint64_t seed = 0;
};

/// Answers a generated test; receives the unit index for seed derivation.
using TestSolver = std::function<int(const IntelligenceTest&, std::size_t)>;

/// Generates n_tests tests of a condition (RNG stream "testgen/<stream>",
/// one sub-stream per unit) and scores the solver on them. Reduction is by
/// unit index, so results are independent of thread count.
inline ExperimentResult evaluate_with_solver(const TestCondition& cond, std::size_t n_tests,
                                             std::uint64_t master_seed, std::string_view stream,
                                             const TestSolver& solver, std::size_t threads = 1) {
  const std::string test_stream = "testgen/" + std::string(stream);
  std::vector<char> correct(n_tests, 0);
  parallel_for(n_tests, threads, [&](std::size_t i) {
    Rng rng = derive_rng(master_seed, test_stream, i);
    const IntelligenceTest test = generate_test(cond, rng);
    correct[i] = solver(test, i) == test.correct_index ? 1 : 0;
  });
  std::size_t hits = 0;
  for (char c : correct) hits += static_cast<std::size_t>(c);
  ExperimentResult r;
  r.condition = condition_name(cond);
  r.n = n_tests;
  r.accuracy = static_cast<double>(hits) / static_cast<double>(n_tests);
  r.ci95 = binomial_ci_halfwidth(r.accuracy, n_tests);
  r.seed = master_seed;
  return r;
}

/// Zero-episode evaluation: every test is solved by a fresh model.
inline ExperimentResult evaluate_condition(const TestCondition& cond, std::size_t n_tests,
                                           const ModelConfig& cfg, std::uint64_t master_seed,
                                           std::size_t threads = 1) {
  const std::string name = condition_name(cond);
  const std::string model_stream = "model/zero/" + name;
  return evaluate_with_solver(
      cond, n_tests, master_seed, "zero/" + name,
      [&](const IntelligenceTest& test, std::size_t i) {
        return solve_test_fresh(test, cfg, derive_seed(master_seed, model_stream, i)).chosen;
      },
      threads);
}

/// All 16 conditions of one predictive feature, in mask order.
inline std::vector<ExperimentResult> sweep_conditions(Feature predictive, std::size_t n_tests,
                                                      const ModelConfig& cfg,
                                                      std::uint64_t master_seed,
                                                      std::size_t threads = 1) {
  std::vector<ExperimentResult> out;
  for (const TestCondition& cond : enumerate_conditions(predictive)) {
    out.push_back(evaluate_condition(cond, n_tests, cfg, master_seed, threads));
  }
  return out;
}

/// Mean accuracy per distractor count (0..4) from a 16-condition sweep.
inline std::array<double, 5> accuracy_by_distractors(std::span<const ExperimentResult> sweep,
                                                     Feature predictive) {
  std::array<double, 5> sum{};
  std::array<std::size_t, 5> count{};
  const auto conditions = enumerate_conditions(predictive);
  if (sweep.size() != conditions.size()) {
    throw std::invalid_argument("sweep must hold all 16 conditions");
  }
  for (std::size_t i = 0; i < conditions.size(); ++i) {
    const int d = conditions[i].distractor_count();
    sum[d] += sweep[i].accuracy;
    count[d] += 1;
  }
  std::array<double, 5> mean{};
  for (int d = 0; d < 5; ++d) mean[d] = sum[d] / static_cast<double>(count[d]);
  return mean;
}

// ---------------------------------------------------------------------------
// Meta-learning

/// Accuracy of a trained model evaluated without updating it: every test is
/// solved by a copy of (model, optimizer state), including the per-test
/// optimization step, so the persistent weights never change.
inline double evaluate_frozen(const ModelParams& trained, const RmsPropState& opt_state,
                              const TestCondition& cond, std::size_t n_tests,
                              std::uint64_t master_seed, std::string_view stream,
                              std::size_t threads = 1) {
  const std::string test_stream = "testgen/" + std::string(stream);
  std::vector<char> correct(n_tests, 0);
  parallel_for(n_tests, threads, [&](std::size_t i) {
    Rng rng = derive_rng(master_seed, test_stream, i);
    const IntelligenceTest test = generate_test(cond, rng);
    ModelParams m = trained;
    RmsPropState opt = opt_state;
    correct[i] = solve_test(test, m, opt).chosen == test.correct_index ? 1 : 0;
  });
  std::size_t hits = 0;
  for (char c : correct) hits += static_cast<std::size_t>(c);
  return static_cast<double>(hits) / static_cast<double>(n_tests);
}

struct MetaOptions {
  std::size_t episodes = 1000;
  std::size_t eval_every = 50;
  std::size_t replicas = 50;
  std::size_t eval_tests = 500;
  bool eval_at_zero = true;  // include an episode-0 checkpoint
  std::size_t threads = 1;
};

struct LearningCurve {
  std::string condition;
  std::vector<std::size_t> episodes;                  // checkpoint episode indices
  std::vector<double> mean_accuracy;                  // over replicas, per checkpoint
  std::vector<std::vector<double>> replica_accuracy;  // [checkpoint][replica]
};

/// Trains persistent replicas on the condition (one step per episode, each
/// on a fresh random test) and measures frozen accuracy at checkpoints.
inline LearningCurve meta_train(const TestCondition& cond, const MetaOptions& opt,
                                const ModelConfig& cfg, std::uint64_t master_seed) {
  if (opt.eval_every == 0) throw std::invalid_argument("eval_every must be positive");
  const std::string name = condition_name(cond);

  std::vector<std::size_t> checkpoints;
  if (opt.eval_at_zero) checkpoints.push_back(0);
  for (std::size_t e = opt.eval_every; e <= opt.episodes; e += opt.eval_every) {
    checkpoints.push_back(e);
  }

  std::vector<std::vector<double>> by_replica(opt.replicas);
  parallel_for(opt.replicas, opt.threads, [&](std::size_t r) {
    ModelParams m = init_model(cfg, derive_seed(master_seed, "meta-init/" + name, r));
    RmsPropState state = make_optimizer(cfg);
    std::vector<double>& accs = by_replica[r];
    const std::string train_stream = "meta-train/" + name + "/" + std::to_string(r);
    auto eval_now = [&](std::size_t episode) {
      const std::string stream =
          "meta-eval/" + name + "/" + std::to_string(r) + "/" + std::to_string(episode);
      accs.push_back(evaluate_frozen(m, state, cond, opt.eval_tests, master_seed, stream, 1));
    };
    if (opt.eval_at_zero) eval_now(0);
    for (std::size_t e = 1; e <= opt.episodes; ++e) {
      Rng rng = derive_rng(master_seed, train_stream, e);
      const IntelligenceTest test = generate_test(cond, rng);
      optimize_step(m, std::span<const Image>(test.sequence), state);
      if (e % opt.eval_every == 0) eval_now(e);
    }
  });

  LearningCurve curve;
  curve.condition = name;
  curve.episodes = checkpoints;
  curve.replica_accuracy.assign(checkpoints.size(), std::vector<double>(opt.replicas, 0.0));
  curve.mean_accuracy.assign(checkpoints.size(), 0.0);
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    double sum = 0.0;
    for (std::size_t r = 0; r < opt.replicas; ++r) {
      curve.replica_accuracy[c][r] = by_replica[r][c];
      sum += by_replica[r][c];
    }
    curve.mean_accuracy[c] = sum / static_cast<double>(opt.replicas);
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Cross-domain transfer

enum class TestType : int { size_easy = 0, size_hard = 1, color_easy = 2, color_hard = 3 };

inline constexpr std::array<TestType, 4> kAllTestTypes = {TestType::size_easy, TestType::size_hard,
                                                          TestType::color_easy,
                                                          TestType::color_hard};

inline std::string_view test_type_name(TestType t) {
  switch (t) {
    case TestType::size_easy: return "size-easy";
    case TestType::size_hard: return "size-hard";
    case TestType::color_easy: return "color-easy";
    case TestType::color_hard: return "color-hard";
  }
  throw std::invalid_argument("unknown test type");
}

/// size/color crossed with easy (all constant) / hard (all distractor).
/// "color" is the shade feature.
inline TestCondition condition_for(TestType t) {
  switch (t) {
    case TestType::size_easy: return make_condition(Feature::size, 0x0);
    case TestType::size_hard: return make_condition(Feature::size, 0xF);
    case TestType::color_easy: return make_condition(Feature::shade, 0x0);
    case TestType::color_hard: return make_condition(Feature::shade, 0xF);
  }
  throw std::invalid_argument("unknown test type");
}

struct CrossDomainOptions {
  std::size_t episodes = 1000;
  std::size_t replicas = 50;
  std::size_t n_tests = 500;  // per (replica, test type)
  std::size_t threads = 1;
};

/// accuracy[0][col] is the untrained baseline; accuracy[1+row][col] is the
/// model trained on kAllTestTypes[row], evaluated on kAllTestTypes[col].
struct CrossDomainResult {
  std::array<std::array<double, 4>, 5> accuracy{};
  std::array<std::array<std::size_t, 4>, 5> n{};  // pooled trial counts
  std::size_t replicas = 0;
};

inline CrossDomainResult cross_domain(const CrossDomainOptions& opt, const ModelConfig& cfg,
                                      std::uint64_t master_seed) {
  CrossDomainResult result;
  result.replicas = opt.replicas;

  for (std::size_t col = 0; col < kAllTestTypes.size(); ++col) {
    const TestType test_type = kAllTestTypes[col];
    const std::string name(test_type_name(test_type));
    const ExperimentResult r =
        evaluate_condition(condition_for(test_type), opt.n_tests, cfg, master_seed, opt.threads);
    result.accuracy[0][col] = r.accuracy;
    result.n[0][col] = r.n;
  }

  for (std::size_t row = 0; row < kAllTestTypes.size(); ++row) {
    const TestType train_type = kAllTestTypes[row];
    const std::string train_name(test_type_name(train_type));
    const TestCondition train_cond = condition_for(train_type);

    std::vector<std::array<double, 4>> per_replica(opt.replicas);
    parallel_for(opt.replicas, opt.threads, [&](std::size_t r) {
      ModelParams m =
          init_model(cfg, derive_seed(master_seed, "xdom-init/" + train_name, r));
      RmsPropState state = make_optimizer(cfg);
      const std::string train_stream = "xdom-train/" + train_name + "/" + std::to_string(r);
      for (std::size_t e = 1; e <= opt.episodes; ++e) {
        Rng rng = derive_rng(master_seed, train_stream, e);
        const IntelligenceTest test = generate_test(train_cond, rng);
        optimize_step(m, std::span<const Image>(test.sequence), state);
      }
      for (std::size_t col = 0; col < kAllTestTypes.size(); ++col) {
        const TestType test_type = kAllTestTypes[col];
        const std::string stream = "xdom-eval/" + train_name + "/" +
                                   std::string(test_type_name(test_type)) + "/" +
                                   std::to_string(r);
        per_replica[r][col] = evaluate_frozen(m, state, condition_for(test_type), opt.n_tests,
                                              master_seed, stream, 1);
      }
    });

    for (std::size_t col = 0; col < kAllTestTypes.size(); ++col) {
      double sum = 0.0;
      for (std::size_t r = 0; r < opt.replicas; ++r) sum += per_replica[r][col];
      result.accuracy[1 + row][col] = sum / static_cast<double>(opt.replicas);
      result.n[1 + row][col] = opt.n_tests * opt.replicas;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Anomaly detection

inline constexpr double kAnomalyFallbackThreshold = 1e-12;

struct AnomalyDecision {
  bool anomalous = false;
  double ratio = 0.0;  // candidate error / reference error
  double eps_candidate = 0.0;
  double eps_threshold = 0.0;  // mean consecutive-pair error after the step
  bool used_fallback = false;  // reference error was zero
};

namespace detail {

/// Candidate error and the mean consecutive-pair error of the sequence,
/// computed with the given (already adapted) model.
inline std::pair<double, double> anomaly_errors(const ModelParams& m,
                                                std::span<const Image> sequence,
                                                const Image& candidate) {
  std::vector<double> z(sequence.size());
  for (std::size_t j = 0; j < sequence.size(); ++j) z[j] = encode(m, sequence[j]);
  double eps_th = 0.0;
  for (std::size_t j = 0; j + 1 < sequence.size(); ++j) {
    const double d = predict_latent(m, z[j]) - z[j + 1];
    eps_th += d * d;
  }
  eps_th /= static_cast<double>(sequence.size() - 1);
  const double dc = predict_latent(m, z.back()) - encode(m, candidate);
  return {dc * dc, eps_th};
}

inline AnomalyDecision decide(double eps_candidate, double eps_threshold, double alpha) {
  AnomalyDecision d;
  d.eps_candidate = eps_candidate;
  d.eps_threshold = eps_threshold;
  if (eps_threshold > 0.0) {
    d.ratio = eps_candidate / eps_threshold;
    d.anomalous = eps_candidate > alpha * eps_threshold;
  } else {
    d.used_fallback = true;
    d.ratio = eps_candidate > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    d.anomalous = eps_candidate > kAnomalyFallbackThreshold;
  }
  return d;
}

}  // namespace detail

/// Fresh model, one optimization step on the sequence, then compare the
/// candidate's prediction error against alpha times the sequence's mean
/// consecutive-pair error. A zero reference error falls back to an
/// absolute threshold and is flagged in the result.
inline AnomalyDecision detect_anomaly(std::span<const Image> sequence, const Image& candidate,
                                      double alpha, const ModelConfig& cfg, std::uint64_t seed) {
  if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
  ModelParams m = init_model(cfg, seed);
  RmsPropState opt = make_optimizer(cfg);
  optimize_step(m, sequence, opt);
  const auto [eps_c, eps_th] = detail::anomaly_errors(m, sequence, candidate);
  return detail::decide(eps_c, eps_th, alpha);
}

/// Error ratios of both candidates of one anomaly test, sharing a single
/// adapted model so a threshold sweep can be done offline.
struct AnomalyScores {
  double congruent_ratio = 0.0;
  double incongruent_ratio = 0.0;
  bool used_fallback = false;
};

inline AnomalyScores score_anomaly_test(const AnomalyTest& test, const ModelConfig& cfg,
                                        std::uint64_t seed) {
  ModelParams m = init_model(cfg, seed);
  RmsPropState opt = make_optimizer(cfg);
  optimize_step(m, std::span<const Image>(test.sequence), opt);
  const auto [eps_cong, eps_th1] = detail::anomaly_errors(m, test.sequence, test.congruent);
  const auto [eps_incong, eps_th2] = detail::anomaly_errors(m, test.sequence, test.incongruent);
  (void)eps_th2;  // same sequence, same model: identical reference
  AnomalyScores s;
  if (eps_th1 > 0.0) {
    s.congruent_ratio = eps_cong / eps_th1;
    s.incongruent_ratio = eps_incong / eps_th1;
  } else {
    s.used_fallback = true;
    const double inf = std::numeric_limits<double>::infinity();
    s.congruent_ratio = eps_cong > kAnomalyFallbackThreshold ? inf : 0.0;
    s.incongruent_ratio = eps_incong > kAnomalyFallbackThreshold ? inf : 0.0;
  }
  return s;
}

inline std::vector<double> default_alpha_sweep() {
  std::vector<double> alphas;
  for (double a = 1.0; a <= 3.0 + 1e-9; a += 0.25) alphas.push_back(a);
  return alphas;
}

struct AnomalySweepResult {
  std::vector<double> alphas;
  std::vector<double> balanced_accuracy;  // per alpha
  double best_alpha = 0.0;
  double best_accuracy = 0.0;
  std::size_t n_tests = 0;
  std::size_t fallback_count = 0;
};

/// Generates n_tests anomaly tests, scores both candidates of each with a
/// fresh adapted model, and reports balanced accuracy (mean of the
/// incongruent hit rate and the congruent pass rate) per alpha.
inline AnomalySweepResult run_anomaly_sweep(std::size_t n_tests, std::span<const double> alphas,
                                            const ModelConfig& cfg, std::uint64_t master_seed,
                                            std::size_t threads = 1) {
  if (n_tests == 0 || alphas.empty()) {
    throw std::invalid_argument("anomaly sweep needs tests and alphas");
  }
  std::vector<AnomalyScores> scores(n_tests);
  parallel_for(n_tests, threads, [&](std::size_t i) {
    Rng rng = derive_rng(master_seed, "anomaly-test", i);
    const AnomalyTest test = generate_anomaly_test(rng);
    scores[i] = score_anomaly_test(test, cfg, derive_seed(master_seed, "anomaly-model", i));
  });

  AnomalySweepResult result;
  result.alphas.assign(alphas.begin(), alphas.end());
  result.n_tests = n_tests;
  for (const AnomalyScores& s : scores) {
    result.fallback_count += s.used_fallback ? 1 : 0;
  }
  for (double alpha : alphas) {
    std::size_t hits = 0, rejections = 0;
    for (const AnomalyScores& s : scores) {
      hits += s.incongruent_ratio > alpha ? 1 : 0;
      rejections += s.congruent_ratio <= alpha ? 1 : 0;
    }
    const double balanced = 0.5 * (static_cast<double>(hits) + static_cast<double>(rejections)) /
                            static_cast<double>(n_tests);
    result.balanced_accuracy.push_back(balanced);
    if (balanced > result.best_accuracy) {
      result.best_accuracy = balanced;
      result.best_alpha = alpha;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Iterative video prediction

struct VideoRun {
  std::vector<Direction> chosen;  // one per completed step
  std::vector<Image> predicted;   // frames appended by the rollout
  std::size_t steps_completed = 0;
  bool stopped_at_border = false;
};

/// Iterated next-frame prediction: slide a 5-frame window; at each step a
/// fresh model takes one optimization step on the window and picks among
/// the four 1-pixel shifts of the last frame. Stops early when the square
/// reaches the frame border.
inline VideoRun predict_video(const VideoTask& task, std::size_t horizon, const ModelConfig& cfg,
                              std::uint64_t seed) {
  if (task.frames.size() < static_cast<std::size_t>(kSequenceLength)) {
    throw GenerationError("video rollout needs at least 5 frames");
  }
  std::vector<Image> window(task.frames.end() - kSequenceLength, task.frames.end());
  VideoRun run;
  for (std::size_t step = 0; step < horizon; ++step) {
    if (touches_border(window.back())) {
      run.stopped_at_border = true;
      break;
    }
    ModelParams m = init_model(cfg, derive_seed(seed, "video-step", step));
    RmsPropState opt = make_optimizer(cfg);
    optimize_step(m, std::span<const Image>(window), opt);

    const std::array<Image, 4> candidates = make_shifted_choices(window.back());
    const double predicted = predict_latent(m, encode(m, window.back()));
    std::array<double, 4> scores{};
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const double d = predicted - encode(m, candidates[c]);
      scores[c] = d * d;
      if (!std::isfinite(scores[c])) {
        throw NumericsError("predict_video: non-finite score at step " + std::to_string(step));
      }
    }
    const int best = detail::argmin_index(scores);
    run.chosen.push_back(kAllDirections[static_cast<std::size_t>(best)]);
    run.predicted.push_back(candidates[static_cast<std::size_t>(best)]);
    window.erase(window.begin());
    window.push_back(run.predicted.back());
  }
  run.steps_completed = run.chosen.size();
  return run;
}

struct VideoExperimentOptions {
  std::size_t single_step_runs = 500;
  std::size_t rollout_runs = 500;
  std::size_t horizon = 45;
  std::size_t example_frames = 5;
  std::size_t frame_size = 64;
  std::size_t square_size = 10;
  Direction rollout_direction = Direction::up;
  std::size_t threads = 1;
};

struct VideoExperimentResult {
  double single_step_accuracy = 0.0;
  std::size_t single_step_n = 0;
  double fully_correct_fraction = 0.0;  // rollouts whose every step chose the true direction
  double mean_steps = 0.0;              // rollout steps before border/horizon
  std::vector<double> visit_ratio;      // fraction of rollouts visiting each pixel
  std::size_t rollout_n = 0;
  std::size_t frame_size = 0;
};

/// Single-step accuracy over random directions plus a fixed-direction
/// rollout ensemble aggregated into a per-pixel visitation map.
inline VideoExperimentResult run_video_experiment(const VideoExperimentOptions& opt,
                                                  const ModelConfig& base_cfg,
                                                  std::uint64_t master_seed) {
  ModelConfig cfg = base_cfg;
  cfg.input_size = opt.frame_size;

  VideoExperimentResult result;
  result.frame_size = opt.frame_size;
  result.single_step_n = opt.single_step_runs;
  result.rollout_n = opt.rollout_runs;

  std::vector<char> correct(opt.single_step_runs, 0);
  parallel_for(opt.single_step_runs, opt.threads, [&](std::size_t i) {
    Rng rng = derive_rng(master_seed, "video-direction", i);
    const Direction dir = random_direction(rng);
    const VideoTask task =
        generate_video(dir, opt.example_frames, opt.frame_size, opt.square_size);
    const VideoRun run =
        predict_video(task, 1, cfg, derive_seed(master_seed, "video-single", i));
    correct[i] = (run.steps_completed == 1 && run.chosen[0] == dir) ? 1 : 0;
  });
  std::size_t hits = 0;
  for (char c : correct) hits += static_cast<std::size_t>(c);
  result.single_step_accuracy =
      static_cast<double>(hits) / static_cast<double>(opt.single_step_runs);

  const std::size_t npx = opt.frame_size * opt.frame_size;
  std::vector<std::size_t> visits(npx, 0);
  std::size_t fully_correct = 0;
  std::size_t total_steps = 0;
  for (std::size_t i = 0; i < opt.rollout_runs; ++i) {
    const VideoTask task = generate_video(opt.rollout_direction, opt.example_frames,
                                          opt.frame_size, opt.square_size);
    const VideoRun run =
        predict_video(task, opt.horizon, cfg, derive_seed(master_seed, "video-rollout", i));
    std::vector<char> seen(npx, 0);
    for (const Image& frame : run.predicted) {
      for (std::size_t p = 0; p < npx; ++p) {
        if (frame.pixels[p] > 0.0) seen[p] = 1;
      }
    }
    for (std::size_t p = 0; p < npx; ++p) visits[p] += static_cast<std::size_t>(seen[p]);
    bool all_true = run.steps_completed > 0;
    for (Direction d : run.chosen) all_true = all_true && d == opt.rollout_direction;
    fully_correct += all_true ? 1 : 0;
    total_steps += run.steps_completed;
  }
  result.fully_correct_fraction =
      static_cast<double>(fully_correct) / static_cast<double>(opt.rollout_runs);
  result.mean_steps = static_cast<double>(total_steps) / static_cast<double>(opt.rollout_runs);
  result.visit_ratio.resize(npx);
  for (std::size_t p = 0; p < npx; ++p) {
    result.visit_ratio[p] =
        static_cast<double>(visits[p]) / static_cast<double>(opt.rollout_runs);
  }
  return result;
}

/// Log-scale rendering of a visitation map: ratio 1 maps to white, the
/// smallest observable ratio (one run) to near-black, never-visited to 0.
inline Image visit_heatmap_image(std::span<const double> visit_ratio, std::size_t frame_size,
                                 std::size_t n_runs) {
  if (visit_ratio.size() != frame_size * frame_size) {
    throw ShapeError("visit map size does not match the frame");
  }
  const double floor_ratio = 1.0 / static_cast<double>(n_runs == 0 ? 1 : n_runs);
  const double log_floor = std::log10(floor_ratio / 2.0);
  Image img(frame_size, frame_size, 0.0);
  for (std::size_t p = 0; p < visit_ratio.size(); ++p) {
    if (visit_ratio[p] <= 0.0) continue;
    const double v = (std::log10(visit_ratio[p]) - log_floor) / (0.0 - log_floor);
    img.pixels[p] = std::clamp(v, 0.0, 1.0);
  }
  return img;
}

/// Sum of visit ratios per column; the rollout trajectory should dominate.
inline std::vector<double> column_mass(std::span<const double> visit_ratio,
                                       std::size_t frame_size) {
  std::vector<double> mass(frame_size, 0.0);
  for (std::size_t y = 0; y < frame_size; ++y) {
    for (std::size_t x = 0; x < frame_size; ++x) mass[x] += visit_ratio[y * frame_size + x];
  }
  return mass;
}

}  // namespace mcpc
