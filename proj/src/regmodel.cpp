#include "reg/regmodel.hpp"

#include <algorithm>

#include "reg/error.hpp"

namespace reg {

const SpeakerPreferences& RegModel::preferences_for(std::string_view speaker) const {
  auto it = preferences.find(std::string(speaker));
  return it == preferences.end() ? fallback_preferences : it->second;
}

Vector describe_features(const RegModel& model, const Scene& scene,
                         std::string_view entity,
                         const std::optional<LandmarkRef>& landmark,
                         const SpeakerInfo& speaker) {
  FeatureMap f = extract_context_features(model.schema, scene, entity, landmark);
  FeatureMap s = extract_speaker_features(
      speaker, model.preferences_for(speaker.id), model.schema);
  f.merge(s);
  return encode(f, model.schema);
}

namespace {

const LevelClassifiers& trained_level(const RegModel& model, int level) {
  auto it = model.levels.find(level);
  if (it == model.levels.end() || !it->second.trained) {
    fail(ErrorKind::kInvalidArgument,
         "level " + std::to_string(level) + " is not trained");
  }
  return it->second;
}

}  // namespace

std::set<std::string> predict_attributes(const RegModel& model, int level,
                                         const Vector& features) {
  const LevelClassifiers& lc = trained_level(model, level);
  const Vector x = apply_scaler(model.scaler, features);
  std::set<std::string> out;
  for (const auto& [attribute, classifier] : lc.attributes) {
    if (predict_binary(classifier, x) > 0) out.insert(attribute);
  }
  return out;
}

std::string predict_relation(const RegModel& model, int level,
                             const Vector& features) {
  const LevelClassifiers& lc = trained_level(model, level);
  return predict_multiclass(lc.relation, apply_scaler(model.scaler, features));
}

namespace {

bool level_trained(const RegModel& model, int level) {
  auto it = model.levels.find(level);
  return it != model.levels.end() && it->second.trained;
}

}  // namespace

std::set<std::string> ModelSelector::attributes(const SelectionQuery& q) const {
  if (!level_trained(model_, q.level)) return {};
  return predict_attributes(
      model_, q.level,
      describe_features(model_, q.scene, q.entity, q.landmark, q.speaker));
}

std::string ModelSelector::relation(const SelectionQuery& q) const {
  if (!level_trained(model_, q.level)) return std::string(kNoRelation);
  return predict_relation(
      model_, q.level,
      describe_features(model_, q.scene, q.entity, q.landmark, q.speaker));
}

namespace {

DescriptionContent describe_entity(const ContentSelector& selector,
                                   const Scene& scene, std::string_view entity,
                                   const SpeakerInfo& speaker,
                                   std::set<std::string>& history) {
  history.insert(std::string(entity));
  const std::size_t depth = history.size();
  const SelectionQuery query{
      scene, entity, nearest_landmark(scene, entity), depth,
      static_cast<int>(std::min<std::size_t>(depth, kMaxClassifierLevel)),
      speaker};

  const ObjectSpec& object = scene.object(entity);
  DescriptionContent content;
  for (const auto& attribute : selector.attributes(query)) {
    if (const std::string* v = object.value_of(attribute)) {
      content.attributes[attribute] = *v;
    }
  }

  const std::string relation = selector.relation(query);
  if (relation != kNoRelation) {
    auto lm = nearest_landmark(scene, entity, relation);
    if (lm && !history.contains(lm->object)) {
      content.set_relation(
          relation, describe_entity(selector, scene, lm->object, speaker, history));
    }
  }
  return content;
}

}  // namespace

DescriptionContent get_description(const ContentSelector& selector,
                                   const Scene& scene, std::string_view target,
                                   const SpeakerInfo& speaker) {
  std::set<std::string> history;
  return describe_entity(selector, scene, target, speaker, history);
}

DescriptionContent get_description(const RegModel& model, const Scene& scene,
                                   std::string_view target,
                                   const SpeakerInfo& speaker) {
  return get_description(ModelSelector(model), scene, target, speaker);
}

}  // namespace reg
