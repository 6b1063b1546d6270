#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "mcpc/features.hpp"

using namespace mcpc;

TEST_CASE("default rules per feature") {
  REQUIRE(default_rule(Feature::number).kind == RuleKind::monotonic_increase);
  REQUIRE(default_rule(Feature::size).kind == RuleKind::monotonic_increase);
  REQUIRE(default_rule(Feature::shade).kind == RuleKind::monotonic_decrease);
  REQUIRE(default_rule(Feature::shape).kind == RuleKind::alternation);
  REQUIRE_THROWS_AS(default_rule(Feature::position), std::invalid_argument);
}

TEST_CASE("apply_rule steps indices and alternates shapes") {
  REQUIRE(apply_rule(default_rule(Feature::size), Feature::size, 2) == 3);
  REQUIRE(apply_rule(default_rule(Feature::shade), Feature::shade, 3) == 2);
  REQUIRE(apply_rule(default_rule(Feature::number), Feature::number, 8) == 9);
  const Rule alt = default_rule(Feature::shape);
  REQUIRE(apply_rule(alt, Feature::shape, static_cast<int>(ShapeKind::triangle)) ==
          static_cast<int>(ShapeKind::square));
  REQUIRE(apply_rule(alt, Feature::shape, static_cast<int>(ShapeKind::square)) ==
          static_cast<int>(ShapeKind::triangle));

  // stepping out of range is an error
  REQUIRE_THROWS_AS(apply_rule(default_rule(Feature::size), Feature::size, 5), GenerationError);
  REQUIRE_THROWS_AS(apply_rule(default_rule(Feature::shade), Feature::shade, 0), GenerationError);
  REQUIRE_THROWS_AS(apply_rule(default_rule(Feature::number), Feature::number, 9),
                    GenerationError);
  // alternation is only defined between triangle and square
  REQUIRE_THROWS_AS(apply_rule(alt, Feature::shape, static_cast<int>(ShapeKind::circle)),
                    GenerationError);
}

TEST_CASE("rule start values allow 6-value chains") {
  REQUIRE(rule_start_values(default_rule(Feature::size), Feature::size, 5) ==
          std::vector<int>{0});
  REQUIRE(rule_start_values(default_rule(Feature::shade), Feature::shade, 5) ==
          std::vector<int>{5});
  REQUIRE(rule_start_values(default_rule(Feature::number), Feature::number, 5) ==
          std::vector<int>{1, 2, 3, 4});
  REQUIRE(rule_start_values(default_rule(Feature::shape), Feature::shape, 5) ==
          std::vector<int>{static_cast<int>(ShapeKind::triangle),
                           static_cast<int>(ShapeKind::square)});
}

TEST_CASE("feature vector get/set round-trips scalar features") {
  FeatureVector f;
  f.set(Feature::number, 7);
  f.set(Feature::shade, 4);
  f.set(Feature::shape, static_cast<int>(ShapeKind::star));
  f.set(Feature::size, 2);
  REQUIRE(f.get(Feature::number) == 7);
  REQUIRE(f.get(Feature::shade) == 4);
  REQUIRE(f.get(Feature::shape) == static_cast<int>(ShapeKind::star));
  REQUIRE(f.get(Feature::size) == 2);
  REQUIRE_THROWS_AS(f.get(Feature::position), std::invalid_argument);
  REQUIRE_THROWS_AS(f.set(Feature::position, 0), std::invalid_argument);
}

TEST_CASE("feature ranges") {
  REQUIRE(feature_range(Feature::number) == std::pair<int, int>{1, 9});
  REQUIRE(feature_range(Feature::shade) == std::pair<int, int>{0, 5});
  REQUIRE(feature_range(Feature::shape) == std::pair<int, int>{0, 4});
  REQUIRE(feature_range(Feature::size) == std::pair<int, int>{0, 5});
}

TEST_CASE("make_condition assigns roles from the distractor mask") {
  // size predictive: non-predictive scalar features in canonical order are
  // number, shade, shape, position
  const TestCondition easy = make_condition(Feature::size, 0x0);
  REQUIRE(easy.predictive == Feature::size);
  REQUIRE(easy.role(Feature::size) == Role::predictive);
  REQUIRE(easy.role(Feature::number) == Role::constant);
  REQUIRE(easy.role(Feature::shade) == Role::constant);
  REQUIRE(easy.role(Feature::shape) == Role::constant);
  REQUIRE(easy.role(Feature::position) == Role::constant);
  REQUIRE(easy.distractor_count() == 0);

  const TestCondition hard = make_condition(Feature::size, 0xF);
  REQUIRE(hard.distractor_count() == 4);
  for (Feature f : {Feature::number, Feature::shade, Feature::shape, Feature::position}) {
    REQUIRE(hard.role(f) == Role::distractor);
  }

  const TestCondition mixed = make_condition(Feature::size, 0x5);  // bits 0 and 2
  REQUIRE(mixed.role(Feature::number) == Role::distractor);
  REQUIRE(mixed.role(Feature::shade) == Role::constant);
  REQUIRE(mixed.role(Feature::shape) == Role::distractor);
  REQUIRE(mixed.role(Feature::position) == Role::constant);
}

TEST_CASE("enumerate_conditions yields 16 distinct masks") {
  const std::vector<TestCondition> conds = enumerate_conditions(Feature::size);
  REQUIRE(conds.size() == 16);
  std::set<std::string> names;
  for (const TestCondition& c : conds) {
    REQUIRE(c.predictive == Feature::size);
    names.insert(condition_name(c));
  }
  REQUIRE(names.size() == 16);
  REQUIRE(conds.front().distractor_count() == 0);
  REQUIRE(conds.back().distractor_count() == 4);
}

TEST_CASE("condition names parse back") {
  for (Feature f : {Feature::number, Feature::shade, Feature::shape, Feature::size}) {
    for (const TestCondition& c : enumerate_conditions(f)) {
      const TestCondition parsed = parse_condition(condition_name(c));
      REQUIRE(parsed.predictive == c.predictive);
      REQUIRE(parsed.roles == c.roles);
    }
  }
}

TEST_CASE("condition aliases") {
  const TestCondition a = parse_condition("size-easy");
  REQUIRE(a.distractor_count() == 0);
  const TestCondition b = parse_condition("size-hard");
  REQUIRE(b.distractor_count() == 4);
  const TestCondition c = parse_condition("color-easy");
  REQUIRE(c.predictive == Feature::shade);
  const TestCondition d = parse_condition("shade-dcdc");
  REQUIRE(d.distractor_count() == 2);
  REQUIRE_THROWS_AS(parse_condition("position-easy"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_condition("size-ccc"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_condition("size-ccxc"), std::invalid_argument);
  REQUIRE_THROWS_AS(parse_condition("gibberish"), std::invalid_argument);
}
