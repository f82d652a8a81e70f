#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reg/corpus.hpp"
#include "reg/vector.hpp"

namespace reg {

using FeatureMap = std::map<std::string, double>;

// Frozen feature layout. Names follow a fixed block order
//   context | speaker one-hot | gender | age | pref_tg | pref_lm
// and are sorted lexicographically inside each block.
class FeatureSchema {
 public:
  FeatureSchema(std::vector<std::string> attributes,
                std::vector<std::string> relations,
                std::vector<std::string> size_values,
                std::vector<std::string> speaker_ids,
                bool include_speaker_ids = true);
  FeatureSchema() : FeatureSchema({}, {}, {}, {}) {}

  const std::vector<std::string>& names() const { return names_; }
  const std::vector<std::string>& speaker_ids() const { return speaker_ids_; }
  const std::vector<std::string>& attributes() const { return attributes_; }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::vector<std::string>& size_values() const { return size_values_; }
  bool include_speaker_ids() const { return include_speaker_ids_; }

  std::size_t dimension() const { return names_.size(); }
  std::optional<std::size_t> index_of(std::string_view name) const;

  // 1-based rank of a size value in the sorted observed values; 0 if unknown.
  double size_rank(const std::string* value) const;

  bool operator==(const FeatureSchema& other) const {
    return names_ == other.names_ && speaker_ids_ == other.speaker_ids_ &&
           attributes_ == other.attributes_ && relations_ == other.relations_ &&
           size_values_ == other.size_values_ &&
           include_speaker_ids_ == other.include_speaker_ids_;
  }

 private:
  std::vector<std::string> attributes_;
  std::vector<std::string> relations_;
  std::vector<std::string> size_values_;
  std::vector<std::string> speaker_ids_;
  bool include_speaker_ids_;
  std::vector<std::string> names_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

// Name of the attribute treated as the numeric object size.
inline constexpr std::string_view kSizeAttribute = "size";

struct SpeakerPreferences {
  std::map<std::string, double> target_freq;
  std::map<std::string, double> landmark_freq;
  std::size_t trials = 0;
  std::size_t landmark_trials = 0;

  // Built from zero trials; all frequencies are zero.
  bool empty() const { return trials == 0; }
  bool operator==(const SpeakerPreferences&) const = default;
};

SpeakerPreferences compute_speaker_preferences(std::span<const Trial* const> trials);

FeatureMap extract_context_features(const FeatureSchema& schema,
                                    const Scene& scene, std::string_view entity,
                                    const std::optional<LandmarkRef>& landmark);

FeatureMap extract_speaker_features(const SpeakerInfo& speaker,
                                    const SpeakerPreferences& prefs,
                                    const FeatureSchema& schema);

// Dense vector in schema order; absent names are 0. A name outside the
// schema is schema drift and throws ErrorKind::kInvalidArgument.
Vector encode(const FeatureMap& features, const FeatureSchema& schema);

struct Scaler {
  Vector mean;
  Vector stddev;

  bool operator==(const Scaler&) const = default;
};

// Population z-score per column; columns with sigma < 1e-12 use sigma = 1.
Scaler fit_scaler(const Matrix& rows);
Vector apply_scaler(const Scaler& scaler, const Vector& x);

}  // namespace reg
