#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace reg {

// Reserved relation class meaning "do not use a relation". Never an edge label.
inline constexpr std::string_view kNoRelation = "no-relation";

struct AttributeValue {
  std::string attribute;
  std::string value;

  auto operator<=>(const AttributeValue&) const = default;
};

struct Position {
  long long x = 0;
  long long y = 0;

  bool operator==(const Position&) const = default;
};

struct ObjectSpec {
  std::string id;
  std::map<std::string, std::string> attributes;
  Position position;

  // nullptr when the object has no such attribute.
  const std::string* value_of(std::string_view attribute) const;
};

struct RelationEdge {
  std::string subject;
  std::string relation;
  std::string object;

  bool operator==(const RelationEdge&) const = default;
};

struct Scene {
  std::string id;
  std::vector<ObjectSpec> objects;
  std::vector<RelationEdge> edges;

  const ObjectSpec* find(std::string_view object_id) const;
  // Throws ErrorKind::kNotFound.
  const ObjectSpec& object(std::string_view object_id) const;
  // Union of attribute names carried by the scene's objects.
  std::set<std::string> attribute_names() const;
};

struct RelationBranch;

// Selected content for one entity plus, optionally, a relation to a landmark
// that carries its own selected content. Attribute names are unique per level
// by construction (map keyed by name).
class DescriptionContent {
 public:
  std::map<std::string, std::string> attributes;

  DescriptionContent();
  ~DescriptionContent();
  DescriptionContent(const DescriptionContent& other);
  DescriptionContent(DescriptionContent&& other) noexcept;
  DescriptionContent& operator=(const DescriptionContent& other);
  DescriptionContent& operator=(DescriptionContent&& other) noexcept;

  bool has_relation() const noexcept { return relation_ != nullptr; }
  const std::string& relation_label() const;
  const DescriptionContent& landmark() const;
  DescriptionContent& landmark();
  void set_relation(std::string label, DescriptionContent landmark);
  void clear_relation() noexcept;

  // Number of levels; an empty root still counts as one level.
  std::size_t depth() const noexcept;
  bool empty() const noexcept { return attributes.empty() && !has_relation(); }

  friend bool operator==(const DescriptionContent& a,
                         const DescriptionContent& b);

 private:
  std::unique_ptr<RelationBranch> relation_;
};

struct RelationBranch {
  std::string label;
  DescriptionContent landmark;
};

enum class Gender { kUnspecified, kFemale, kMale };

struct SpeakerInfo {
  std::string id;
  Gender gender = Gender::kUnspecified;
  int age_bracket = 0;
};

struct Trial {
  std::string id;
  std::string scene;
  std::string target;
  std::string speaker;
  DescriptionContent gold;
};

enum class ReferenceType { kUnderspecified, kMinimal, kOverspecified };

inline constexpr ReferenceType kAllReferenceTypes[] = {
    ReferenceType::kMinimal, ReferenceType::kOverspecified,
    ReferenceType::kUnderspecified};

std::string_view to_string(ReferenceType type);
std::string_view to_string(Gender gender);

// Validated, immutable corpus. The constructor checks every data-model
// invariant and derives the attribute inventory A and relation inventory R.
class Corpus {
 public:
  Corpus(std::vector<std::string> attributes, std::vector<std::string> relations,
         std::vector<SpeakerInfo> speakers, std::vector<Scene> scenes,
         std::vector<Trial> trials);

  const std::vector<std::string>& attributes() const { return attributes_; }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::vector<SpeakerInfo>& speakers() const { return speakers_; }
  const std::vector<Scene>& scenes() const { return scenes_; }
  const std::vector<Trial>& trials() const { return trials_; }

  const Scene& scene(std::string_view id) const;
  const SpeakerInfo& speaker(std::string_view id) const;
  const Trial& trial(std::string_view id) const;
  const Scene& scene_of(const Trial& trial) const { return scene(trial.scene); }

  // Sorted distinct values of one attribute across all scene objects.
  std::vector<std::string> values_of(std::string_view attribute) const;

 private:
  std::vector<std::string> attributes_;
  std::vector<std::string> relations_;
  std::vector<SpeakerInfo> speakers_;
  std::vector<Scene> scenes_;
  std::vector<Trial> trials_;
  std::map<std::string, std::size_t, std::less<>> scene_index_;
  std::map<std::string, std::size_t, std::less<>> speaker_index_;
  std::map<std::string, std::size_t, std::less<>> trial_index_;
};

// Neutral JSON corpus format. Loading is strict: unknown fields, dangling
// identifiers and incomplete objects are errors naming the offender.
Corpus load_corpus(std::string_view json_text);
std::string save_corpus(const Corpus& corpus);

// All objects denoted by `content` in `scene`.
std::set<std::string> resolve(const Scene& scene,
                              const DescriptionContent& content);

ReferenceType classify_reference_type(const Scene& scene,
                                      std::string_view target,
                                      const DescriptionContent& content);

struct LandmarkRef {
  std::string object;
  std::string relation;

  bool operator==(const LandmarkRef&) const = default;
};

// Closest related object by Euclidean distance; ties go to the smallest
// (object id, relation label). When `relation` is given only edges with that
// label are considered.
std::optional<LandmarkRef> nearest_landmark(
    const Scene& scene, std::string_view target,
    std::optional<std::string_view> relation = std::nullopt);

// True when every pair in `content` holds for `entity` and, for a relation,
// some edge (entity, label, o') leads to an o' the landmark content is true of.
bool is_truthful(const Scene& scene, std::string_view entity,
                 const DescriptionContent& content);

// The landmark object a truthful relational description refers to: the
// nearest (same tie-break as nearest_landmark) related object the landmark
// content is true of.
std::optional<std::string> referenced_landmark(const Scene& scene,
                                               std::string_view entity,
                                               const DescriptionContent& content);

}  // namespace reg
