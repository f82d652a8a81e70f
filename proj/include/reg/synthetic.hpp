#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "reg/corpus.hpp"
#include "reg/profile.hpp"

namespace reg {

// How a relation label is derived from object geometry. An edge (a, label, b)
// exists when b lies within the neighbour radius of a, the displacement a->b
// is dominated by `axis`, and its sign agrees with `direction`.
struct RelationRule {
  enum class Axis { kHorizontal, kVertical };
  enum class Direction { kAny, kIncreasing, kDecreasing };

  std::string label;
  Axis axis = Axis::kHorizontal;
  Direction direction = Direction::kAny;
};

struct SyntheticConfig {
  std::map<std::string, std::vector<std::string>> attributes;
  std::vector<RelationRule> relations;
  int min_objects = 3;
  int max_objects = 6;
  int grid_size = 6;
  int neighbour_radius = 2;
  int overspecifiers = 0;
  int minimalists = 0;
  int mixed = 0;
  int trials_per_speaker = 10;
  // Probability that a mixed speaker overspecifies a given description.
  double mixed_overspec_rate = 0.5;
  // Probability that a speaker habitually relates the target to a landmark.
  double relational_speaker_rate = 0.0;
  // Population attribute order. Empty: every speaker gets an independent
  // uniformly random ranking. Otherwise each speaker starts from this order and
  // one adjacent-swap pass is applied with `preference_swap_rate` per pair.
  std::vector<std::string> preference_order;
  double preference_swap_rate = 0.0;
  int max_retries = 200;
};

// Strict JSON form of SyntheticConfig (see configs/ for examples).
SyntheticConfig parse_synthetic_config(std::string_view json_text);

struct SyntheticCorpus {
  Corpus corpus;
  // Generating behaviour of each speaker.
  std::map<std::string, SpeakerProfile> profiles;
};

// Deterministic in (config, seed). Throws ErrorKind::kInvalidArgument for an
// invalid config and ErrorKind::kRuntime when a trial cannot be realised
// within `max_retries` fresh scenes.
SyntheticCorpus generate_synthetic(const SyntheticConfig& config,
                                   std::uint64_t seed);

}  // namespace reg
