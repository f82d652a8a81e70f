#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "reg/corpus.hpp"
#include "reg/features.hpp"
#include "reg/svm.hpp"

namespace reg {

// Classifier lookup stops at level 2; deeper entities reuse level 2.
inline constexpr int kMaxClassifierLevel = 2;

struct LevelClassifiers {
  bool trained = false;
  std::map<std::string, BinarySvmModel> attributes;
  MulticlassModel relation;

  bool operator==(const LevelClassifiers&) const = default;
};

// Outcome of model selection for one classifier.
struct GridRecord {
  std::string classifier;  // e.g. "L1/colour", "L2/relation"
  SvmParams best;
  std::vector<GridPoint> log;
  std::size_t train_rows = 0;
  std::size_t validation_rows = 0;
  // The validation fold had no rows for this level; training rows were
  // scored instead.
  bool validated_on_train = false;

  bool operator==(const GridRecord&) const = default;
};

struct ModelMetadata {
  std::string method;
  std::uint64_t seed = 0;
  std::vector<GridRecord> grid;

  bool operator==(const ModelMetadata&) const = default;
};

struct RegModel {
  std::map<int, LevelClassifiers> levels;
  FeatureSchema schema;
  Scaler scaler;
  std::map<std::string, SpeakerPreferences> preferences;
  // Pooled over all training trials; used for speakers without an entry.
  SpeakerPreferences fallback_preferences;
  ModelMetadata metadata;

  const SpeakerPreferences& preferences_for(std::string_view speaker) const;
  bool operator==(const RegModel&) const = default;
};

// Raw (unscaled) feature vector for describing `entity`.
Vector describe_features(const RegModel& model, const Scene& scene,
                         std::string_view entity,
                         const std::optional<LandmarkRef>& landmark,
                         const SpeakerInfo& speaker);

// Both take raw vectors; the model's scaler is applied internally.
// Throw ErrorKind::kInvalidArgument for an untrained level.
std::set<std::string> predict_attributes(const RegModel& model, int level,
                                         const Vector& features);
std::string predict_relation(const RegModel& model, int level,
                             const Vector& features);

// What a content selector sees for one entity of the description.
struct SelectionQuery {
  const Scene& scene;
  std::string_view entity;
  std::optional<LandmarkRef> landmark;  // nearest landmark of `entity`
  std::size_t depth;                    // |H| after adding `entity`
  int level;                            // min(depth, kMaxClassifierLevel)
  const SpeakerInfo& speaker;
};

class ContentSelector {
 public:
  virtual ~ContentSelector() = default;
  virtual std::set<std::string> attributes(const SelectionQuery& query) const = 0;
  // A relation label or kNoRelation.
  virtual std::string relation(const SelectionQuery& query) const = 0;
};

// Selector backed by a trained model. Untrained levels select nothing.
class ModelSelector final : public ContentSelector {
 public:
  explicit ModelSelector(const RegModel& model) : model_(model) {}

  std::set<std::string> attributes(const SelectionQuery& query) const override;
  std::string relation(const SelectionQuery& query) const override;

 private:
  const RegModel& model_;
};

// Recursive, history-guarded content selection. The landmark for a predicted
// relation is the nearest object related to the entity by that label; it is
// dropped when absent or already described.
DescriptionContent get_description(const ContentSelector& selector,
                                   const Scene& scene, std::string_view target,
                                   const SpeakerInfo& speaker);

DescriptionContent get_description(const RegModel& model, const Scene& scene,
                                   std::string_view target,
                                   const SpeakerInfo& speaker);

// Canonical, version-tagged JSON document. Byte-stable for a given model.
std::string save_model(const RegModel& model);
// Throws ErrorKind::kParse for corrupt or unknown-version documents.
RegModel load_model(std::string_view text);

}  // namespace reg
