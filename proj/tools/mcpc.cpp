// Command-line front end: generate tests, run the experiments, export
// CSV/JSON/PNG artifacts. Every subcommand writes a run-config JSON with a
// stable hash next to its outputs so results are traceable to settings.
#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mcpc/experiments.hpp"
#include "mcpc/gradcheck.hpp"
#include "mcpc/model.hpp"
#include "mcpc/render.hpp"
#include "mcpc/results.hpp"
#include "mcpc/serialize.hpp"
#include "mcpc/testgen.hpp"

namespace fs = std::filesystem;
using namespace mcpc;

namespace {

struct CommonArgs {
  std::uint64_t seed = 20240817;
  std::size_t threads = default_threads();
  std::string out = "out";
};

void add_common(CLI::App* cmd, CommonArgs& c) {
  cmd->add_option("--seed", c.seed, "Master seed for all derived RNG streams");
  cmd->add_option("--threads", c.threads, "Worker threads (0 = hardware default)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", c.out, "Output directory");
}

void add_model_overrides(CLI::App* cmd, ModelConfig& cfg) {
  cmd->add_option("--lr", cfg.learning_rate, "Learning rate for the single-step optimizer");
  cmd->add_option("--rms-decay", cfg.rms_decay, "Squared-gradient running-average decay");
  cmd->add_option("--rms-epsilon", cfg.rms_epsilon, "Denominator stabilizer");
}

fs::path prepare_out(const CommonArgs& c, const std::string& run_name, const ModelConfig& cfg,
                     const json& extra) {
  fs::create_directories(c.out);
  json run{{"run", run_name},
           {"seed", c.seed},
           {"threads", c.threads},
           {"model", to_json(cfg)},
           {"settings", extra}};
  run["config_hash"] = config_hash(run);
  write_json(fs::path(c.out) / (run_name + "-config.json"), run);
  return fs::path(c.out);
}

std::string hash_for(const std::string& run_name, const CommonArgs& c, const ModelConfig& cfg,
                     const json& extra) {
  json run{{"run", run_name},
           {"seed", c.seed},
           {"threads", c.threads},
           {"model", to_json(cfg)},
           {"settings", extra}};
  return config_hash(run);
}

std::size_t effective_threads(const CommonArgs& c) {
  return c.threads == 0 ? default_threads() : c.threads;
}

int cmd_gen_tests(const CommonArgs& c, const std::string& condition, std::size_t count,
                  bool anomaly) {
  const RenderParams rp;
  const ModelConfig cfg;
  const json extra{{"condition", condition}, {"count", count}, {"anomaly", anomaly}};
  const fs::path dir = prepare_out(c, "gen-tests", cfg, extra);
  const TestCondition cond = parse_condition(condition);
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = derive_rng(c.seed, "testgen/cli/" + condition, i);
    char tag[32];
    std::snprintf(tag, sizeof tag, "test-%04zu", i);
    if (anomaly) {
      const AnomalyTest t = generate_anomaly_test(rng, rp);
      for (std::size_t k = 0; k < t.sequence.size(); ++k) {
        write_png(dir / (std::string(tag) + "-seq" + std::to_string(k) + ".png"), t.sequence[k]);
      }
      write_png(dir / (std::string(tag) + "-congruent.png"), t.congruent);
      write_png(dir / (std::string(tag) + "-incongruent.png"), t.incongruent);
    } else {
      const IntelligenceTest t = generate_test(cond, rng, rp);
      for (std::size_t k = 0; k < t.sequence.size(); ++k) {
        write_png(dir / (std::string(tag) + "-seq" + std::to_string(k) + ".png"), t.sequence[k]);
      }
      for (std::size_t k = 0; k < t.choices.size(); ++k) {
        write_png(dir / (std::string(tag) + "-choice" + std::to_string(k) + ".png"), t.choices[k]);
      }
      write_json(dir / (std::string(tag) + ".json"), test_manifest(t, rp));
    }
  }
  std::printf("wrote %zu %s tests to %s\n", count, condition.c_str(), dir.string().c_str());
  return 0;
}

int cmd_solve(const CommonArgs& c, const ModelConfig& cfg, const std::string& condition,
              std::size_t n) {
  const json extra{{"condition", condition}, {"n", n}};
  const fs::path dir = prepare_out(c, "solve", cfg, extra);
  const std::string hash = hash_for("solve", c, cfg, extra);
  const ExperimentResult r =
      evaluate_condition(parse_condition(condition), n, cfg, c.seed, effective_threads(c));
  const ResultRow row{"zero", r.condition, r.n, r.accuracy, r.ci95, r.seed, hash};
  write_csv(dir / "solve.csv", std::span<const ResultRow>(&row, 1));
  std::printf("%s: accuracy %.4f ± %.4f (n=%zu)\n", r.condition.c_str(), r.accuracy, r.ci95, r.n);
  return 0;
}

int cmd_sweep(const CommonArgs& c, const ModelConfig& cfg, const std::string& feature,
              std::size_t n) {
  const json extra{{"feature", feature}, {"n", n}};
  const fs::path dir = prepare_out(c, "sweep-conditions", cfg, extra);
  const std::string hash = hash_for("sweep-conditions", c, cfg, extra);
  const Feature f = parse_condition(feature + "-cccc").predictive;
  const std::vector<ExperimentResult> sweep =
      sweep_conditions(f, n, cfg, c.seed, effective_threads(c));
  std::vector<ResultRow> rows;
  for (const ExperimentResult& r : sweep) {
    rows.push_back({"sweep", r.condition, r.n, r.accuracy, r.ci95, r.seed, hash});
    std::printf("%-16s %.4f ± %.4f\n", r.condition.c_str(), r.accuracy, r.ci95);
  }
  write_csv(dir / "sweep.csv", rows);
  const std::array<double, 5> means =
      accuracy_by_distractors(std::span<const ExperimentResult>(sweep), f);
  std::printf("mean by distractor count:");
  for (int d = 0; d < 5; ++d) std::printf(" %d:%.4f", d, means[d]);
  std::printf("\n");
  return 0;
}

int cmd_meta(const CommonArgs& c, const ModelConfig& cfg, const std::string& condition,
             MetaOptions opt) {
  opt.threads = effective_threads(c);
  const json extra{{"condition", condition}, {"episodes", opt.episodes},
                   {"eval_every", opt.eval_every}, {"replicas", opt.replicas},
                   {"eval_tests", opt.eval_tests}};
  const fs::path dir = prepare_out(c, "meta-train", cfg, extra);
  const std::string hash = hash_for("meta-train", c, cfg, extra);
  const LearningCurve curve = meta_train(parse_condition(condition), opt, cfg, c.seed);
  std::vector<ResultRow> rows;
  for (std::size_t k = 0; k < curve.episodes.size(); ++k) {
    const std::string label = curve.condition + "@" + std::to_string(curve.episodes[k]);
    const double acc = curve.mean_accuracy[k];
    const std::size_t n = opt.eval_tests * opt.replicas;
    rows.push_back({"meta", label, n, acc, binomial_ci_halfwidth(acc, n), c.seed, hash});
    std::printf("%-24s %.4f\n", label.c_str(), acc);
  }
  write_csv(dir / "meta.csv", rows);
  return 0;
}

int cmd_cross_domain(const CommonArgs& c, const ModelConfig& cfg, CrossDomainOptions opt) {
  opt.threads = effective_threads(c);
  const json extra{
      {"episodes", opt.episodes}, {"replicas", opt.replicas}, {"n_tests", opt.n_tests}};
  const fs::path dir = prepare_out(c, "cross-domain", cfg, extra);
  const std::string hash = hash_for("cross-domain", c, cfg, extra);
  const CrossDomainResult m = cross_domain(opt, cfg, c.seed);
  std::vector<ResultRow> rows;
  for (std::size_t row = 0; row < m.accuracy.size(); ++row) {
    const std::string train =
        row == 0 ? "untrained" : std::string(test_type_name(kAllTestTypes[row - 1]));
    for (std::size_t col = 0; col < m.accuracy[row].size(); ++col) {
      const std::string label = train + "->" + std::string(test_type_name(kAllTestTypes[col]));
      const double acc = m.accuracy[row][col];
      rows.push_back({"cross-domain", label, m.n[row][col], acc,
                      binomial_ci_halfwidth(acc, m.n[row][col]), c.seed, hash});
    }
    std::printf("%-12s", train.c_str());
    for (std::size_t col = 0; col < m.accuracy[row].size(); ++col) {
      std::printf(" %.4f", m.accuracy[row][col]);
    }
    std::printf("\n");
  }
  write_csv(dir / "cross-domain.csv", rows);
  return 0;
}

int cmd_anomaly(const CommonArgs& c, const ModelConfig& cfg, std::size_t n) {
  const json extra{{"n", n}};
  const fs::path dir = prepare_out(c, "anomaly", cfg, extra);
  const std::string hash = hash_for("anomaly", c, cfg, extra);
  const std::vector<double> alphas = default_alpha_sweep();
  const AnomalySweepResult r =
      run_anomaly_sweep(n, std::span<const double>(alphas), cfg, c.seed, effective_threads(c));
  std::vector<ResultRow> rows;
  for (std::size_t i = 0; i < r.alphas.size(); ++i) {
    char label[32];
    std::snprintf(label, sizeof label, "alpha=%.2f", r.alphas[i]);
    rows.push_back({"anomaly", label, n, r.balanced_accuracy[i],
                    binomial_ci_halfwidth(r.balanced_accuracy[i], 2 * n), c.seed, hash});
    std::printf("%s  balanced accuracy %.4f\n", label, r.balanced_accuracy[i]);
  }
  write_csv(dir / "anomaly.csv", rows);
  std::printf("best: alpha=%.2f  balanced accuracy %.4f\n", r.best_alpha, r.best_accuracy);
  return 0;
}

int cmd_video(const CommonArgs& c, const ModelConfig& cfg, VideoExperimentOptions opt) {
  opt.threads = effective_threads(c);
  const json extra{{"single_step_runs", opt.single_step_runs},
                   {"rollout_runs", opt.rollout_runs},
                   {"horizon", opt.horizon},
                   {"frame_size", opt.frame_size},
                   {"square_size", opt.square_size},
                   {"rollout_direction", std::string(direction_name(opt.rollout_direction))}};
  const fs::path dir = prepare_out(c, "video", cfg, extra);
  const std::string hash = hash_for("video", c, cfg, extra);
  const VideoExperimentResult r = run_video_experiment(opt, cfg, c.seed);
  std::vector<ResultRow> rows;
  rows.push_back({"video-single-step", "single", r.single_step_n, r.single_step_accuracy,
                  binomial_ci_halfwidth(r.single_step_accuracy, r.single_step_n), c.seed, hash});
  rows.push_back({"video-rollout", "fully-correct", r.rollout_n, r.fully_correct_fraction,
                  binomial_ci_halfwidth(r.fully_correct_fraction, r.rollout_n), c.seed, hash});
  write_csv(dir / "video.csv", rows);
  const Image heatmap =
      visit_heatmap_image(std::span<const double>(r.visit_ratio), r.frame_size, r.rollout_n);
  write_png(dir / "rollout-heatmap.png", heatmap);
  std::printf("single-step accuracy %.4f (n=%zu)\n", r.single_step_accuracy, r.single_step_n);
  std::printf("rollouts: fully correct %.4f, mean steps %.1f (n=%zu)\n", r.fully_correct_fraction,
              r.mean_steps, r.rollout_n);
  std::printf("heatmap written to %s\n", (dir / "rollout-heatmap.png").string().c_str());
  return 0;
}

int cmd_gradcheck(const CommonArgs& c, std::size_t seeds) {
  GradCheckOptions opt;
  opt.seeds = seeds;
  const GradCheckReport r = run_gradcheck(opt, c.seed);
  std::printf("seeds %zu  params %zu  kink skips %zu  max rel err %.3e  %s\n", r.seeds_run,
              r.params_checked, r.kink_skips, r.max_rel_err, r.passed ? "ok" : "FAILED");
  if (!r.passed) std::printf("worst: %s\n", r.worst.c_str());
  return r.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Markov contrastive predictive coding on procedural intelligence tests"};
  app.require_subcommand(1);

  CommonArgs common;
  ModelConfig cfg;

  std::string condition = "size-easy";
  std::string feature = "size";
  std::size_t count = 4;
  std::size_t n_tests = 500;
  bool anomaly_tests = false;

  CLI::App* gen = app.add_subcommand("gen-tests", "Render tests to PNG with JSON manifests");
  add_common(gen, common);
  gen->add_option("--condition", condition, "Condition name, e.g. size-easy or shade-dcdc");
  gen->add_option("--count", count, "Number of tests to render");
  gen->add_flag("--anomaly", anomaly_tests, "Generate anomaly tests instead");

  CLI::App* solve = app.add_subcommand("solve", "Zero-episode accuracy on one condition");
  add_common(solve, common);
  add_model_overrides(solve, cfg);
  solve->add_option("--condition", condition, "Condition name");
  solve->add_option("--n", n_tests, "Number of tests");

  CLI::App* sweep = app.add_subcommand("sweep-conditions",
                                       "Zero-episode accuracy on all 16 conditions of a feature");
  add_common(sweep, common);
  add_model_overrides(sweep, cfg);
  sweep->add_option("--feature", feature, "Predictive feature: size, shade, number, shape");
  sweep->add_option("--n", n_tests, "Tests per condition");

  MetaOptions meta_opt;
  CLI::App* meta = app.add_subcommand("meta-train", "Train replicas and report a learning curve");
  add_common(meta, common);
  add_model_overrides(meta, cfg);
  meta->add_option("--condition", condition, "Condition name");
  meta->add_option("--episodes", meta_opt.episodes, "Training episodes per replica");
  meta->add_option("--eval-every", meta_opt.eval_every, "Checkpoint spacing in episodes");
  meta->add_option("--replicas", meta_opt.replicas, "Independent replicas");
  meta->add_option("--eval-tests", meta_opt.eval_tests, "Tests per checkpoint evaluation");

  CrossDomainOptions xd_opt;
  CLI::App* xdom = app.add_subcommand("cross-domain",
                                      "Train on each test type, evaluate on all of them");
  add_common(xdom, common);
  add_model_overrides(xdom, cfg);
  xdom->add_option("--episodes", xd_opt.episodes, "Training episodes per replica");
  xdom->add_option("--replicas", xd_opt.replicas, "Replicas per training type");
  xdom->add_option("--n", xd_opt.n_tests, "Tests per (replica, test type)");

  CLI::App* anom = app.add_subcommand("anomaly", "Balanced anomaly-detection accuracy vs alpha");
  add_common(anom, common);
  add_model_overrides(anom, cfg);
  anom->add_option("--n", n_tests, "Number of anomaly tests");

  VideoExperimentOptions vid_opt;
  CLI::App* video = app.add_subcommand("video", "Moving-square prediction and rollouts");
  add_common(video, common);
  add_model_overrides(video, cfg);
  video->add_option("--single-runs", vid_opt.single_step_runs, "Single-step prediction runs");
  video->add_option("--rollouts", vid_opt.rollout_runs, "Iterated rollout runs");
  video->add_option("--horizon", vid_opt.horizon, "Rollout length in frames");
  video->add_option("--frame-size", vid_opt.frame_size, "Square frame edge in pixels");

  std::size_t gc_seeds = 100;
  CLI::App* gradcheck = app.add_subcommand("gradcheck",
                                           "Finite-difference check of the analytic gradients");
  add_common(gradcheck, common);
  gradcheck->add_option("--seeds", gc_seeds, "Random model/sequence draws");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen->parsed()) return cmd_gen_tests(common, condition, count, anomaly_tests);
    if (solve->parsed()) return cmd_solve(common, cfg, condition, n_tests);
    if (sweep->parsed()) return cmd_sweep(common, cfg, feature, n_tests);
    if (meta->parsed()) return cmd_meta(common, cfg, condition, meta_opt);
    if (xdom->parsed()) return cmd_cross_domain(common, cfg, xd_opt);
    if (anom->parsed()) return cmd_anomaly(common, cfg, n_tests);
    if (video->parsed()) return cmd_video(common, cfg, vid_opt);
    if (gradcheck->parsed()) return cmd_gradcheck(common, gc_seeds);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
