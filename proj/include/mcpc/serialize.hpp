#pragma once

#include <json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "mcpc/features.hpp"
#include "mcpc/image.hpp"
#include "mcpc/model.hpp"
#include "mcpc/render.hpp"
#include "mcpc/rng.hpp"
#include "mcpc/testgen.hpp"

namespace mcpc {

using json = nlohmann::json;

inline json to_json(const ModelConfig& cfg) {
  return json{{"input_size", cfg.input_size},
              {"conv_channels", cfg.conv_channels},
              {"kernel_size", cfg.kernel_size},
              {"conv_stride", cfg.conv_stride},
              {"predictor_hidden", cfg.predictor_hidden},
              {"init_gain", cfg.init_gain},
              {"head_positive", cfg.head_positive},
              {"predictor_hidden_gain", cfg.predictor_hidden_gain},
              {"zero_final_predictor", cfg.zero_final_predictor},
              {"kernel_smooth_passes", cfg.kernel_smooth_passes},
              {"learning_rate", cfg.learning_rate},
              {"rms_decay", cfg.rms_decay},
              {"rms_epsilon", cfg.rms_epsilon}};
}

inline json to_json(const RenderParams& rp) {
  return json{{"canvas", rp.canvas},
              {"grid", rp.grid},
              {"cell", rp.cell},
              {"margin", rp.margin},
              {"background", rp.background},
              {"shade_step", rp.shade_step},
              {"min_diameter", rp.min_diameter},
              {"max_diameter", rp.max_diameter},
              {"star_inner_ratio", rp.star_inner_ratio}};
}

inline json to_json(const FeatureVector& f) {
  return json{{"number", f.number},
              {"shade", f.shade},
              {"shape", std::string(shape_name(f.shape))},
              {"size", f.size},
              {"position_order", f.position_order}};
}

inline json to_json(const TestCondition& c) {
  json roles = json::object();
  for (Feature f : kAllFeatures) {
    const char* role = c.role(f) == Role::predictive ? "predictive"
                       : c.role(f) == Role::constant ? "constant"
                                                     : "distractor";
    roles[std::string(feature_name(f))] = role;
  }
  return json{{"name", condition_name(c)},
              {"predictive", std::string(feature_name(c.predictive))},
              {"roles", roles},
              {"distractors", c.distractor_count()}};
}

/// Manifest describing one generated test's provenance and content.
inline json test_manifest(const IntelligenceTest& t, const RenderParams& rp) {
  json seq = json::array();
  for (const FeatureVector& f : t.sequence_features) seq.push_back(to_json(f));
  json choices = json::array();
  for (const FeatureVector& f : t.choice_features) choices.push_back(to_json(f));
  return json{{"condition", to_json(t.condition)},
              {"correct_index", t.correct_index},
              {"sequence_features", seq},
              {"choice_features", choices},
              {"render_params", to_json(rp)}};
}

/// Stable 64-bit hash of a JSON document (keys are emitted sorted).
inline std::string config_hash(const json& j) {
  const std::string dump = j.dump();
  const std::uint64_t h = detail::fnv1a64(0xcbf29ce484222325ULL, dump.data(), dump.size());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

inline void write_json(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
}

}  // namespace mcpc
