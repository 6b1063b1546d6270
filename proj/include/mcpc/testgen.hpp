#pragma once

#include <array>
#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

#include "mcpc/features.hpp"
#include "mcpc/image.hpp"
#include "mcpc/render.hpp"
#include "mcpc/rng.hpp"

namespace mcpc {

inline constexpr int kSequenceLength = 5;  // K
inline constexpr int kNumChoices = 4;      // n

inline int sample_scalar(Feature f, Rng& rng) {
  const auto [lo, hi] = feature_range(f);
  return rng.uniform_int(lo, hi);
}

inline std::array<int, 9> sample_position_order(Rng& rng) {
  std::array<int, 9> perm = {0, 1, 2, 3, 4, 5, 6, 7, 8};
  rng.shuffle(std::span<int>(perm));
  return perm;
}

/// Uniform over [lo, hi] minus one excluded value.
inline int sample_excluding(int lo, int hi, int excluded, Rng& rng) {
  if (hi - lo < 1) throw GenerationError("empty pool after exclusion");
  const int v = lo + static_cast<int>(rng.uniform_index(static_cast<std::size_t>(hi - lo)));
  return v >= excluded ? v + 1 : v;
}

/// Feature vectors for one test: the 5-image sequence plus the correct
/// continuation, and the predictive-feature values of the 3 wrong choices.
struct SampledFeatures {
  std::array<FeatureVector, 6> chain;
  std::array<int, 3> wrong_values;
};

/// Draws features for a condition. Constant features are sampled once,
/// distractors fresh per image, and the predictive feature runs its rule
/// from a uniformly chosen legal start. Wrong values are sampled without
/// replacement from the legal values excluding the correct continuation.
inline SampledFeatures sample_test_features(const TestCondition& cond, Rng& rng) {
  SampledFeatures out;

  FeatureVector constants;
  for (Feature f : kAllFeatures) {
    if (cond.role(f) != Role::constant) continue;
    if (f == Feature::position) constants.position_order = sample_position_order(rng);
    else constants.set(f, sample_scalar(f, rng));
  }

  const auto starts = rule_start_values(cond.rule, cond.predictive, kSequenceLength);
  std::array<int, 6> chain_values;
  chain_values[0] = starts[rng.uniform_index(starts.size())];
  for (int j = 1; j < 6; ++j) {
    chain_values[j] = apply_rule(cond.rule, cond.predictive, chain_values[j - 1]);
  }

  for (int j = 0; j < 6; ++j) {
    FeatureVector fv;
    for (Feature f : kAllFeatures) {
      switch (cond.role(f)) {
        case Role::predictive:
          fv.set(f, chain_values[j]);
          break;
        case Role::constant:
          if (f == Feature::position) fv.position_order = constants.position_order;
          else fv.set(f, constants.get(f));
          break;
        case Role::distractor:
          if (f == Feature::position) fv.position_order = sample_position_order(rng);
          else fv.set(f, sample_scalar(f, rng));
          break;
      }
    }
    out.chain[j] = fv;
  }

  const auto [lo, hi] = feature_range(cond.predictive);
  const int correct = chain_values[5];
  std::vector<int> pool;
  for (int v = lo; v <= hi; ++v) {
    if (v != correct) pool.push_back(v);
  }
  rng.shuffle(std::span<int>(pool));
  for (int k = 0; k < 3; ++k) out.wrong_values[k] = pool[static_cast<std::size_t>(k) % pool.size()];
  return out;
}

struct IntelligenceTest {
  std::array<Image, 5> sequence;
  std::array<Image, 4> choices;
  int correct_index = 0;
  TestCondition condition;
  std::array<FeatureVector, 5> sequence_features;
  std::array<FeatureVector, 4> choice_features;
};

/// Generates a full test: samples features, places the correct choice at a
/// uniform index, fills the wrong choices (fresh distractor draws per
/// choice image), and renders all 9 images.
inline IntelligenceTest generate_test(const TestCondition& cond, Rng& rng,
                                      const RenderParams& rp = {}) {
  IntelligenceTest test;
  test.condition = cond;
  const SampledFeatures s = sample_test_features(cond, rng);
  test.correct_index = static_cast<int>(rng.uniform_index(kNumChoices));

  int wrong = 0;
  for (int c = 0; c < kNumChoices; ++c) {
    if (c == test.correct_index) {
      test.choice_features[c] = s.chain[5];
      continue;
    }
    FeatureVector fv;
    for (Feature f : kAllFeatures) {
      switch (cond.role(f)) {
        case Role::predictive:
          fv.set(f, s.wrong_values[wrong]);
          break;
        case Role::constant:
          if (f == Feature::position) fv.position_order = s.chain[0].position_order;
          else fv.set(f, s.chain[0].get(f));
          break;
        case Role::distractor:
          if (f == Feature::position) fv.position_order = sample_position_order(rng);
          else fv.set(f, sample_scalar(f, rng));
          break;
      }
    }
    test.choice_features[c] = fv;
    ++wrong;
  }

  for (int j = 0; j < kSequenceLength; ++j) {
    test.sequence_features[j] = s.chain[j];
    test.sequence[j] = render(s.chain[j], rp);
  }
  for (int c = 0; c < kNumChoices; ++c) test.choices[c] = render(test.choice_features[c], rp);
  return test;
}

struct AnomalyTest {
  std::array<Image, 5> sequence;
  Image congruent;
  Image incongruent;
  std::array<FeatureVector, 5> sequence_features;
  FeatureVector congruent_features;
  FeatureVector incongruent_features;
};

/// Sequence whose objects grow, multiply, and darken by one index per
/// image (size and number indices rise, the gray index falls) while shape
/// and positions stay fixed. The congruent candidate continues all three
/// progressions; the incongruent one breaks all three.
inline AnomalyTest generate_anomaly_test(Rng& rng, const RenderParams& rp = {}) {
  AnomalyTest t;
  const auto shape = static_cast<ShapeKind>(rng.uniform_index(kNumShapeKinds));
  const auto position = sample_position_order(rng);
  const int n0 = rng.uniform_int(kMinNumber, kMaxNumber - 5);

  for (int j = 0; j < 6; ++j) {
    FeatureVector fv;
    fv.shape = shape;
    fv.position_order = position;
    fv.size = j;
    fv.shade = kShadeLevels - 1 - j;
    fv.number = n0 + j;
    if (j < 5) t.sequence_features[j] = fv;
    else t.congruent_features = fv;
  }

  FeatureVector bad;
  bad.shape = shape;
  bad.position_order = position;
  bad.size = sample_excluding(0, kSizeLevels - 1, 5, rng);
  bad.shade = sample_excluding(0, kShadeLevels - 1, 0, rng);
  bad.number = sample_excluding(kMinNumber, kMaxNumber, n0 + 5, rng);
  t.incongruent_features = bad;

  for (int j = 0; j < 5; ++j) t.sequence[j] = render(t.sequence_features[j], rp);
  t.congruent = render(t.congruent_features, rp);
  t.incongruent = render(t.incongruent_features, rp);
  return t;
}

enum class Direction : int { up = 0, down = 1, left = 2, right = 3 };

inline constexpr std::array<Direction, 4> kAllDirections = {Direction::up, Direction::down,
                                                            Direction::left, Direction::right};

inline std::string_view direction_name(Direction d) {
  switch (d) {
    case Direction::up: return "up";
    case Direction::down: return "down";
    case Direction::left: return "left";
    case Direction::right: return "right";
  }
  throw std::invalid_argument("unknown direction");
}

/// (row delta, column delta) of one step; rows grow downward.
inline std::pair<int, int> direction_delta(Direction d) {
  switch (d) {
    case Direction::up: return {-1, 0};
    case Direction::down: return {1, 0};
    case Direction::left: return {0, -1};
    case Direction::right: return {0, 1};
  }
  throw std::invalid_argument("unknown direction");
}

inline Direction random_direction(Rng& rng) {
  return kAllDirections[rng.uniform_index(kAllDirections.size())];
}

struct VideoTask {
  std::vector<Image> frames;
  std::size_t square_size = 10;
  std::size_t frame_size = 64;
  Direction direction = Direction::up;
  int start_row = 0;  // top-left corner of the square in frame 0
  int start_col = 0;
};

/// Black frame with a white square whose top-left corner is (row, col).
inline Image square_frame(std::size_t frame_size, std::size_t square_size, int row, int col) {
  if (row < 0 || col < 0 || static_cast<std::size_t>(row) + square_size > frame_size ||
      static_cast<std::size_t>(col) + square_size > frame_size) {
    throw GenerationError("square leaves the frame");
  }
  Image img(frame_size, frame_size, 0.0);
  for (std::size_t y = 0; y < square_size; ++y) {
    for (std::size_t x = 0; x < square_size; ++x) {
      img.at(static_cast<std::size_t>(row) + y, static_cast<std::size_t>(col) + x) = 1.0;
    }
  }
  return img;
}

/// A square starting at the frame center and moving 1 px/frame in
/// `direction`. Throws GenerationError if the trajectory exits the frame.
inline VideoTask generate_video(Direction direction, std::size_t total_frames,
                                std::size_t frame_size = 64, std::size_t square_size = 10) {
  if (total_frames == 0) throw GenerationError("video needs at least one frame");
  VideoTask task;
  task.square_size = square_size;
  task.frame_size = frame_size;
  task.direction = direction;
  task.start_row = static_cast<int>((frame_size - square_size) / 2);
  task.start_col = task.start_row;
  const auto [dy, dx] = direction_delta(direction);
  task.frames.reserve(total_frames);
  for (std::size_t t = 0; t < total_frames; ++t) {
    const int row = task.start_row + dy * static_cast<int>(t);
    const int col = task.start_col + dx * static_cast<int>(t);
    task.frames.push_back(square_frame(frame_size, square_size, row, col));
  }
  return task;
}

/// True if any foreground pixel lies on the outermost pixel ring.
inline bool touches_border(const Image& frame) {
  const std::size_t h = frame.height, w = frame.width;
  for (std::size_t x = 0; x < w; ++x) {
    if (frame.at(0, x) > 0.0 || frame.at(h - 1, x) > 0.0) return true;
  }
  for (std::size_t y = 0; y < h; ++y) {
    if (frame.at(y, 0) > 0.0 || frame.at(y, w - 1) > 0.0) return true;
  }
  return false;
}

/// The four 1-pixel translations of the last frame, in canonical order
/// up, down, left, right. Throws GenerationError at the frame border.
inline std::array<Image, 4> make_shifted_choices(const Image& last_frame) {
  if (touches_border(last_frame)) {
    throw GenerationError("square touches the border; no legal shifted choices");
  }
  std::array<Image, 4> out;
  for (std::size_t i = 0; i < kAllDirections.size(); ++i) {
    const auto [dy, dx] = direction_delta(kAllDirections[i]);
    out[i] = translate(last_frame, dy, dx, 0.0);
  }
  return out;
}

}  // namespace mcpc
