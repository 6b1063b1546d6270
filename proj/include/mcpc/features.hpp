#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mcpc {

struct GenerationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The five image features. Order is canonical and used for condition
/// naming, sampling order, and role bitmasks.
enum class Feature : int { number = 0, shade = 1, shape = 2, size = 3, position = 4 };

inline constexpr std::array<Feature, 5> kAllFeatures = {
    Feature::number, Feature::shade, Feature::shape, Feature::size, Feature::position};

enum class ShapeKind : int { circle = 0, triangle = 1, square = 2, star = 3, hexagon = 4 };

inline constexpr int kNumShapeKinds = 5;
inline constexpr int kShadeLevels = 6;
inline constexpr int kSizeLevels = 6;
inline constexpr int kMinNumber = 1;
inline constexpr int kMaxNumber = 9;
inline constexpr int kGridCells = 9;

inline std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::number: return "number";
    case Feature::shade: return "shade";
    case Feature::shape: return "shape";
    case Feature::size: return "size";
    case Feature::position: return "position";
  }
  throw std::invalid_argument("unknown feature");
}

inline std::string_view shape_name(ShapeKind s) {
  switch (s) {
    case ShapeKind::circle: return "circle";
    case ShapeKind::triangle: return "triangle";
    case ShapeKind::square: return "square";
    case ShapeKind::star: return "star";
    case ShapeKind::hexagon: return "hexagon";
  }
  throw std::invalid_argument("unknown shape");
}

/// One image's complete description. Scalar features are stored as ints
/// (shape as the ShapeKind index) so rules can treat them uniformly.
struct FeatureVector {
  int number = 1;                       // objects in the image, 1..9
  int shade = 0;                        // gray index 0..5, 0 = darkest
  ShapeKind shape = ShapeKind::circle;  // object outline
  int size = 0;                         // size index 0..5, enclosing-circle diameter
  std::array<int, 9> position_order = {0, 1, 2, 3, 4, 5, 6, 7, 8};  // grid cell fill order

  int get(Feature f) const {
    switch (f) {
      case Feature::number: return number;
      case Feature::shade: return shade;
      case Feature::shape: return static_cast<int>(shape);
      case Feature::size: return size;
      case Feature::position: throw std::invalid_argument("position has no scalar value");
    }
    throw std::invalid_argument("unknown feature");
  }

  void set(Feature f, int v) {
    switch (f) {
      case Feature::number: number = v; return;
      case Feature::shade: shade = v; return;
      case Feature::shape: shape = static_cast<ShapeKind>(v); return;
      case Feature::size: size = v; return;
      case Feature::position: throw std::invalid_argument("position has no scalar value");
    }
    throw std::invalid_argument("unknown feature");
  }
};

/// Inclusive scalar value range of a feature.
inline std::pair<int, int> feature_range(Feature f) {
  switch (f) {
    case Feature::number: return {kMinNumber, kMaxNumber};
    case Feature::shade: return {0, kShadeLevels - 1};
    case Feature::shape: return {0, kNumShapeKinds - 1};
    case Feature::size: return {0, kSizeLevels - 1};
    case Feature::position: throw std::invalid_argument("position has no scalar range");
  }
  throw std::invalid_argument("unknown feature");
}

enum class Role : int { predictive = 0, constant = 1, distractor = 2 };

enum class RuleKind : int {
  monotonic_increase,  // +1 index per image
  monotonic_decrease,  // -1 index per image (shade: darker)
  alternation,         // triangle <-> square
};

struct Rule {
  RuleKind kind = RuleKind::monotonic_increase;
};

/// The rule a feature follows when it is predictive.
inline Rule default_rule(Feature f) {
  switch (f) {
    case Feature::number: return {RuleKind::monotonic_increase};
    case Feature::shade: return {RuleKind::monotonic_decrease};
    case Feature::shape: return {RuleKind::alternation};
    case Feature::size: return {RuleKind::monotonic_increase};
    case Feature::position:
      throw std::invalid_argument("position cannot be predictive");
  }
  throw std::invalid_argument("unknown feature");
}

/// Next value under `rule`; throws GenerationError if the result would
/// leave the feature's legal range.
inline int apply_rule(const Rule& rule, Feature f, int value) {
  const auto [lo, hi] = feature_range(f);
  switch (rule.kind) {
    case RuleKind::monotonic_increase: {
      if (value + 1 > hi) {
        throw GenerationError("rule step out of range for " + std::string(feature_name(f)) +
                              ": " + std::to_string(value) + " + 1 > " + std::to_string(hi));
      }
      return value + 1;
    }
    case RuleKind::monotonic_decrease: {
      if (value - 1 < lo) {
        throw GenerationError("rule step out of range for " + std::string(feature_name(f)) +
                              ": " + std::to_string(value) + " - 1 < " + std::to_string(lo));
      }
      return value - 1;
    }
    case RuleKind::alternation: {
      const auto s = static_cast<ShapeKind>(value);
      if (s == ShapeKind::triangle) return static_cast<int>(ShapeKind::square);
      if (s == ShapeKind::square) return static_cast<int>(ShapeKind::triangle);
      throw GenerationError("alternation is defined only for triangle and square");
    }
  }
  throw std::invalid_argument("unknown rule kind");
}

/// Start values from which `steps` rule applications stay legal.
inline std::vector<int> rule_start_values(const Rule& rule, Feature f, int steps) {
  const auto [lo, hi] = feature_range(f);
  std::vector<int> starts;
  switch (rule.kind) {
    case RuleKind::monotonic_increase:
      for (int v = lo; v + steps <= hi; ++v) starts.push_back(v);
      break;
    case RuleKind::monotonic_decrease:
      for (int v = lo + steps; v <= hi; ++v) starts.push_back(v);
      break;
    case RuleKind::alternation:
      starts = {static_cast<int>(ShapeKind::triangle), static_cast<int>(ShapeKind::square)};
      break;
  }
  if (starts.empty()) {
    throw GenerationError("no legal start value for " + std::string(feature_name(f)) + " over " +
                          std::to_string(steps) + " steps");
  }
  return starts;
}

/// A test condition: which feature is predictive (and its rule), and
/// whether each remaining feature is held constant or resampled per image.
struct TestCondition {
  Feature predictive = Feature::size;
  Rule rule;
  std::array<Role, 5> roles = {Role::constant, Role::constant, Role::constant, Role::constant,
                               Role::constant};  // indexed by Feature

  Role role(Feature f) const { return roles[static_cast<int>(f)]; }

  int distractor_count() const {
    int n = 0;
    for (Role r : roles) n += (r == Role::distractor) ? 1 : 0;
    return n;
  }
};

/// Builds a condition from a 4-bit distractor mask. Bit i refers to the
/// i-th non-predictive feature in canonical order; a set bit makes it a
/// distractor, a clear bit holds it constant.
inline TestCondition make_condition(Feature predictive, unsigned distractor_mask) {
  if (predictive == Feature::position) {
    throw std::invalid_argument("position cannot be predictive");
  }
  if (distractor_mask > 0xF) throw std::invalid_argument("distractor mask must be 4 bits");
  TestCondition c;
  c.predictive = predictive;
  c.rule = default_rule(predictive);
  c.roles[static_cast<int>(predictive)] = Role::predictive;
  int bit = 0;
  for (Feature f : kAllFeatures) {
    if (f == predictive) continue;
    c.roles[static_cast<int>(f)] =
        (distractor_mask >> bit & 1u) ? Role::distractor : Role::constant;
    ++bit;
  }
  return c;
}

/// All 16 constant/distractor assignments for one predictive feature,
/// ordered by mask (0 = all constant ... 15 = all distractor).
inline std::vector<TestCondition> enumerate_conditions(Feature predictive) {
  std::vector<TestCondition> out;
  out.reserve(16);
  for (unsigned mask = 0; mask < 16; ++mask) out.push_back(make_condition(predictive, mask));
  return out;
}

/// Canonical name, e.g. "size-cccc" (easy) or "size-dddd" (hard). The four
/// letters cover the non-predictive features in canonical order.
inline std::string condition_name(const TestCondition& c) {
  std::string name(feature_name(c.predictive));
  name += '-';
  for (Feature f : kAllFeatures) {
    if (f == c.predictive) continue;
    name += (c.role(f) == Role::distractor) ? 'd' : 'c';
  }
  return name;
}

/// Parses "size-ccdc" style names plus the aliases <feature>-easy /
/// <feature>-hard; "color" is accepted for shade. Throws std::invalid_argument.
inline TestCondition parse_condition(std::string_view text) {
  const auto dash = text.find('-');
  if (dash == std::string_view::npos) {
    throw std::invalid_argument("condition must look like 'size-easy' or 'size-ccdd'");
  }
  const std::string_view fname = text.substr(0, dash);
  const std::string_view spec = text.substr(dash + 1);
  Feature predictive;
  if (fname == "number") predictive = Feature::number;
  else if (fname == "shade" || fname == "color") predictive = Feature::shade;
  else if (fname == "shape") predictive = Feature::shape;
  else if (fname == "size") predictive = Feature::size;
  else throw std::invalid_argument("unknown predictive feature '" + std::string(fname) + "'");

  if (spec == "easy") return make_condition(predictive, 0x0);
  if (spec == "hard") return make_condition(predictive, 0xF);
  if (spec.size() != 4) {
    throw std::invalid_argument("role spec must be 'easy', 'hard', or 4 of [cd]");
  }
  unsigned mask = 0;
  for (int i = 0; i < 4; ++i) {
    if (spec[i] == 'd') mask |= 1u << i;
    else if (spec[i] != 'c') throw std::invalid_argument("role letters must be 'c' or 'd'");
  }
  return make_condition(predictive, mask);
}

}  // namespace mcpc
