#include "reg/corpus.hpp"

#include <algorithm>
#include <tuple>
#include <utility>

#include "json_io.hpp"
#include "reg/error.hpp"

namespace reg {

using json_io::json;

const std::string* ObjectSpec::value_of(std::string_view attribute) const {
  auto it = attributes.find(std::string(attribute));
  return it == attributes.end() ? nullptr : &it->second;
}

const ObjectSpec* Scene::find(std::string_view object_id) const {
  for (const auto& o : objects) {
    if (o.id == object_id) return &o;
  }
  return nullptr;
}

const ObjectSpec& Scene::object(std::string_view object_id) const {
  const ObjectSpec* o = find(object_id);
  if (o == nullptr) {
    fail(ErrorKind::kNotFound, "object '" + std::string(object_id) +
                                   "' not in scene '" + id + "'");
  }
  return *o;
}

std::set<std::string> Scene::attribute_names() const {
  std::set<std::string> names;
  for (const auto& o : objects) {
    for (const auto& [name, value] : o.attributes) names.insert(name);
  }
  return names;
}

// --- DescriptionContent ----------------------------------------------------

DescriptionContent::DescriptionContent() = default;
DescriptionContent::~DescriptionContent() = default;
DescriptionContent::DescriptionContent(DescriptionContent&&) noexcept = default;
DescriptionContent& DescriptionContent::operator=(DescriptionContent&&) noexcept =
    default;

DescriptionContent::DescriptionContent(const DescriptionContent& other)
    : attributes(other.attributes),
      relation_(other.relation_ ? std::make_unique<RelationBranch>(*other.relation_)
                                : nullptr) {}

DescriptionContent& DescriptionContent::operator=(const DescriptionContent& other) {
  if (this != &other) {
    DescriptionContent copy(other);
    *this = std::move(copy);
  }
  return *this;
}

const std::string& DescriptionContent::relation_label() const {
  if (!relation_) fail(ErrorKind::kInvalidArgument, "description has no relation");
  return relation_->label;
}

const DescriptionContent& DescriptionContent::landmark() const {
  if (!relation_) fail(ErrorKind::kInvalidArgument, "description has no relation");
  return relation_->landmark;
}

DescriptionContent& DescriptionContent::landmark() {
  if (!relation_) fail(ErrorKind::kInvalidArgument, "description has no relation");
  return relation_->landmark;
}

void DescriptionContent::set_relation(std::string label,
                                      DescriptionContent landmark) {
  relation_ = std::make_unique<RelationBranch>(
      RelationBranch{std::move(label), std::move(landmark)});
}

void DescriptionContent::clear_relation() noexcept { relation_.reset(); }

std::size_t DescriptionContent::depth() const noexcept {
  return relation_ ? 1 + relation_->landmark.depth() : 1;
}

bool operator==(const DescriptionContent& a, const DescriptionContent& b) {
  if (a.attributes != b.attributes) return false;
  if (a.has_relation() != b.has_relation()) return false;
  if (!a.has_relation()) return true;
  return a.relation_->label == b.relation_->label &&
         a.relation_->landmark == b.relation_->landmark;
}

std::string_view to_string(ReferenceType type) {
  switch (type) {
    case ReferenceType::kUnderspecified: return "underspecified";
    case ReferenceType::kMinimal: return "minimal";
    case ReferenceType::kOverspecified: return "overspecified";
  }
  return "?";
}

std::string_view to_string(Gender gender) {
  switch (gender) {
    case Gender::kFemale: return "female";
    case Gender::kMale: return "male";
    case Gender::kUnspecified: return "unspecified";
  }
  return "?";
}

// --- Semantics -------------------------------------------------------------

namespace {

long long squared_distance(const ObjectSpec& a, const ObjectSpec& b) {
  const long long dx = a.position.x - b.position.x;
  const long long dy = a.position.y - b.position.y;
  return dx * dx + dy * dy;
}

void check_attribute_names(const std::set<std::string>& known,
                           const DescriptionContent& content) {
  for (const auto& [name, value] : content.attributes) {
    if (!known.contains(name)) {
      fail(ErrorKind::kInvalidArgument, "unknown attribute '" + name + "'");
    }
  }
  if (content.has_relation()) check_attribute_names(known, content.landmark());
}

std::set<std::string> resolve_checked(const Scene& scene,
                                      const DescriptionContent& content) {
  std::set<std::string> landmarks;
  if (content.has_relation()) landmarks = resolve_checked(scene, content.landmark());

  std::set<std::string> out;
  for (const auto& o : scene.objects) {
    bool match = true;
    for (const auto& [name, value] : content.attributes) {
      const std::string* v = o.value_of(name);
      if (v == nullptr || *v != value) {
        match = false;
        break;
      }
    }
    if (!match) continue;
    if (content.has_relation()) {
      match = std::any_of(scene.edges.begin(), scene.edges.end(),
                          [&](const RelationEdge& e) {
                            return e.subject == o.id &&
                                   e.relation == content.relation_label() &&
                                   landmarks.contains(e.object);
                          });
    }
    if (match) out.insert(o.id);
  }
  return out;
}

// Every sub-content of `content`: any subset of each level's pairs, with each
// relation branch either kept (recursively reduced) or dropped. The first
// element is always `content` itself.
std::vector<DescriptionContent> sub_contents(const DescriptionContent& content) {
  std::vector<DescriptionContent> below;
  if (content.has_relation()) below = sub_contents(content.landmark());

  std::vector<std::pair<std::string, std::string>> pairs(
      content.attributes.begin(), content.attributes.end());
  const std::size_t m = pairs.size();
  const std::size_t full = (std::size_t{1} << m) - 1;

  std::vector<DescriptionContent> out;
  // Descending masks put the complete attribute set first.
  for (std::size_t mask = full + 1; mask-- > 0;) {
    DescriptionContent base;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (std::size_t{1} << i)) base.attributes.insert(pairs[i]);
    }
    for (const auto& lm : below) {
      DescriptionContent with = base;
      with.set_relation(content.relation_label(), lm);
      out.push_back(std::move(with));
    }
    out.push_back(std::move(base));
  }
  return out;
}

}  // namespace

std::set<std::string> resolve(const Scene& scene,
                              const DescriptionContent& content) {
  check_attribute_names(scene.attribute_names(), content);
  return resolve_checked(scene, content);
}

ReferenceType classify_reference_type(const Scene& scene,
                                      std::string_view target,
                                      const DescriptionContent& content) {
  scene.object(target);
  check_attribute_names(scene.attribute_names(), content);
  const std::set<std::string> wanted{std::string(target)};
  if (resolve_checked(scene, content) != wanted) {
    return ReferenceType::kUnderspecified;
  }
  const auto candidates = sub_contents(content);
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (resolve_checked(scene, candidates[i]) == wanted) {
      return ReferenceType::kOverspecified;
    }
  }
  return ReferenceType::kMinimal;
}

std::optional<LandmarkRef> nearest_landmark(
    const Scene& scene, std::string_view target,
    std::optional<std::string_view> relation) {
  const ObjectSpec& t = scene.object(target);
  std::optional<std::tuple<long long, std::string, std::string>> best;
  for (const auto& e : scene.edges) {
    if (e.subject != target) continue;
    if (relation && e.relation != *relation) continue;
    auto key = std::make_tuple(squared_distance(t, scene.object(e.object)),
                               e.object, e.relation);
    if (!best || key < *best) best = std::move(key);
  }
  if (!best) return std::nullopt;
  return LandmarkRef{std::get<1>(*best), std::get<2>(*best)};
}

bool is_truthful(const Scene& scene, std::string_view entity,
                 const DescriptionContent& content) {
  const ObjectSpec* o = scene.find(entity);
  if (o == nullptr) return false;
  for (const auto& [name, value] : content.attributes) {
    const std::string* v = o->value_of(name);
    if (v == nullptr || *v != value) return false;
  }
  if (!content.has_relation()) return true;
  return referenced_landmark(scene, entity, content).has_value();
}

std::optional<std::string> referenced_landmark(const Scene& scene,
                                               std::string_view entity,
                                               const DescriptionContent& content) {
  if (!content.has_relation()) return std::nullopt;
  const ObjectSpec& t = scene.object(entity);
  std::optional<std::tuple<long long, std::string, std::string>> best;
  for (const auto& e : scene.edges) {
    if (e.subject != entity || e.relation != content.relation_label()) continue;
    if (!is_truthful(scene, e.object, content.landmark())) continue;
    auto key = std::make_tuple(squared_distance(t, scene.object(e.object)),
                               e.object, e.relation);
    if (!best || key < *best) best = std::move(key);
  }
  if (!best) return std::nullopt;
  return std::get<1>(*best);
}

// --- Corpus ----------------------------------------------------------------

namespace {

template <typename T>
std::map<std::string, std::size_t, std::less<>> index_by_id(
    const std::vector<T>& items, std::string_view what) {
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id.empty()) fail(ErrorKind::kValidation, std::string(what) + " with empty id");
    if (!index.emplace(items[i].id, i).second) {
      fail(ErrorKind::kValidation,
           "duplicate " + std::string(what) + " id '" + items[i].id + "'");
    }
  }
  return index;
}

void collect_relation_labels(const DescriptionContent& c, std::set<std::string>& out) {
  if (!c.has_relation()) return;
  out.insert(c.relation_label());
  collect_relation_labels(c.landmark(), out);
}

}  // namespace

Corpus::Corpus(std::vector<std::string> attributes,
               std::vector<std::string> relations,
               std::vector<SpeakerInfo> speakers, std::vector<Scene> scenes,
               std::vector<Trial> trials)
    : speakers_(std::move(speakers)),
      scenes_(std::move(scenes)),
      trials_(std::move(trials)) {
  speaker_index_ = index_by_id(speakers_, "speaker");
  scene_index_ = index_by_id(scenes_, "scene");
  trial_index_ = index_by_id(trials_, "trial");

  std::set<std::string> attr_set(attributes.begin(), attributes.end());
  std::set<std::string> rel_set(relations.begin(), relations.end());
  for (const auto& s : scenes_) {
    for (const auto& o : s.objects) {
      for (const auto& [name, value] : o.attributes) attr_set.insert(name);
    }
    for (const auto& e : s.edges) rel_set.insert(e.relation);
  }
  for (const auto& t : trials_) collect_relation_labels(t.gold, rel_set);
  for (const auto& name : attr_set) {
    if (name.empty()) fail(ErrorKind::kValidation, "empty attribute name");
  }
  if (rel_set.contains(std::string(kNoRelation))) {
    fail(ErrorKind::kValidation,
         "the reserved label '" + std::string(kNoRelation) +
             "' cannot be used as a relation");
  }
  attributes_.assign(attr_set.begin(), attr_set.end());
  relations_.assign(rel_set.begin(), rel_set.end());

  for (const auto& s : scenes_) {
    if (s.objects.size() < 2) {
      fail(ErrorKind::kValidation,
           "scene '" + s.id + "' needs at least 2 objects");
    }
    index_by_id(s.objects, "object in scene '" + s.id + "':");
    for (const auto& o : s.objects) {
      for (const auto& a : attributes_) {
        const std::string* v = o.value_of(a);
        if (v == nullptr) {
          fail(ErrorKind::kValidation, "object '" + o.id + "' in scene '" +
                                           s.id + "' is missing attribute '" +
                                           a + "'");
        }
        if (v->empty()) {
          fail(ErrorKind::kValidation, "object '" + o.id + "' in scene '" +
                                           s.id + "' has empty value for '" +
                                           a + "'");
        }
      }
    }
    for (const auto& e : s.edges) {
      for (const auto* end : {&e.subject, &e.object}) {
        if (s.find(*end) == nullptr) {
          fail(ErrorKind::kValidation, "dangling identifier '" + *end +
                                           "' in edge of scene '" + s.id + "'");
        }
      }
      if (e.subject == e.object) {
        fail(ErrorKind::kValidation, "self edge on '" + e.subject +
                                         "' in scene '" + s.id + "'");
      }
    }
  }

  for (const auto& t : trials_) {
    auto sc = scene_index_.find(t.scene);
    if (sc == scene_index_.end()) {
      fail(ErrorKind::kValidation, "dangling identifier '" + t.scene +
                                       "' (scene of trial '" + t.id + "')");
    }
    if (!speaker_index_.contains(t.speaker)) {
      fail(ErrorKind::kValidation, "dangling identifier '" + t.speaker +
                                       "' (speaker of trial '" + t.id + "')");
    }
    const Scene& s = scenes_[sc->second];
    if (s.find(t.target) == nullptr) {
      fail(ErrorKind::kValidation, "dangling identifier '" + t.target +
                                       "' (target of trial '" + t.id + "')");
    }
    for (const DescriptionContent* c = &t.gold;; c = &c->landmark()) {
      for (const auto& [name, value] : c->attributes) {
        if (!attr_set.contains(name)) {
          fail(ErrorKind::kValidation, "trial '" + t.id +
                                           "' uses unknown attribute '" +
                                           name + "'");
        }
      }
      if (!c->has_relation()) break;
    }
    if (t.gold.depth() > s.objects.size()) {
      fail(ErrorKind::kValidation,
           "gold description of trial '" + t.id + "' is deeper than its scene");
    }
    if (!is_truthful(s, t.target, t.gold)) {
      fail(ErrorKind::kValidation, "gold description of trial '" + t.id +
                                       "' is not true of target '" +
                                       t.target + "'");
    }
  }
}

const Scene& Corpus::scene(std::string_view id) const {
  auto it = scene_index_.find(id);
  if (it == scene_index_.end()) {
    fail(ErrorKind::kNotFound, "unknown scene '" + std::string(id) + "'");
  }
  return scenes_[it->second];
}

const SpeakerInfo& Corpus::speaker(std::string_view id) const {
  auto it = speaker_index_.find(id);
  if (it == speaker_index_.end()) {
    fail(ErrorKind::kNotFound, "unknown speaker '" + std::string(id) + "'");
  }
  return speakers_[it->second];
}

const Trial& Corpus::trial(std::string_view id) const {
  auto it = trial_index_.find(id);
  if (it == trial_index_.end()) {
    fail(ErrorKind::kNotFound, "unknown trial '" + std::string(id) + "'");
  }
  return trials_[it->second];
}

std::vector<std::string> Corpus::values_of(std::string_view attribute) const {
  std::set<std::string> values;
  for (const auto& s : scenes_) {
    for (const auto& o : s.objects) {
      if (const std::string* v = o.value_of(attribute)) values.insert(*v);
    }
  }
  return {values.begin(), values.end()};
}

// --- Serialization ---------------------------------------------------------

namespace {

using json_io::expect_keys;
using json_io::field;
using json_io::integer_field;
using json_io::string_field;

std::vector<std::string> string_list(const json& j, std::string_view key,
                                     std::string_view ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_array()) fail(ErrorKind::kParse, json_io::where(ctx, key) + " must be an array");
  std::vector<std::string> out;
  for (const json& s : v) {
    if (!s.is_string()) {
      fail(ErrorKind::kParse, json_io::where(ctx, key) + " must hold strings");
    }
    out.push_back(s.get<std::string>());
  }
  return out;
}

const json& array_field(const json& j, std::string_view key, std::string_view ctx) {
  const json& v = field(j, key, ctx);
  if (!v.is_array()) fail(ErrorKind::kParse, json_io::where(ctx, key) + " must be an array");
  return v;
}

Gender parse_gender(const std::string& s, const std::string& ctx) {
  if (s == "female") return Gender::kFemale;
  if (s == "male") return Gender::kMale;
  if (s == "unspecified") return Gender::kUnspecified;
  fail(ErrorKind::kParse, ctx + ": unknown gender '" + s + "'");
}

}  // namespace

Corpus load_corpus(std::string_view json_text) {
  const json doc = json_io::parse(json_text, "corpus");
  expect_keys(doc, "corpus",
              {"version", "attributes", "relations", "speakers", "scenes", "trials"});
  if (integer_field(doc, "version", "corpus") != 1) {
    fail(ErrorKind::kParse, "unsupported corpus version");
  }
  auto attributes = string_list(doc, "attributes", "corpus");
  auto relations = string_list(doc, "relations", "corpus");

  std::vector<SpeakerInfo> speakers;
  for (const json& s : array_field(doc, "speakers", "corpus")) {
    expect_keys(s, "speaker", {"id", "gender", "age_bracket"});
    SpeakerInfo info;
    info.id = string_field(s, "id", "speaker");
    const std::string ctx = "speaker '" + info.id + "'";
    info.gender = s.contains("gender")
                      ? parse_gender(string_field(s, "gender", ctx), ctx)
                      : Gender::kUnspecified;
    info.age_bracket =
        s.contains("age_bracket")
            ? static_cast<int>(integer_field(s, "age_bracket", ctx))
            : 0;
    if (info.age_bracket < 0) fail(ErrorKind::kValidation, ctx + ": negative age_bracket");
    speakers.push_back(std::move(info));
  }

  std::vector<Scene> scenes;
  for (const json& s : array_field(doc, "scenes", "corpus")) {
    expect_keys(s, "scene", {"id", "objects", "edges"});
    Scene scene;
    scene.id = string_field(s, "id", "scene");
    const std::string ctx = "scene '" + scene.id + "'";
    for (const json& o : array_field(s, "objects", ctx)) {
      expect_keys(o, ctx + ".object", {"id", "position", "attributes"});
      ObjectSpec obj;
      obj.id = string_field(o, "id", ctx + ".object");
      const std::string octx = ctx + ".object '" + obj.id + "'";
      const json& pos = field(o, "position", octx);
      if (!pos.is_array() || pos.size() != 2 || !pos[0].is_number_integer() ||
          !pos[1].is_number_integer()) {
        fail(ErrorKind::kParse, octx + ": position must be [x, y] integers");
      }
      obj.position = {pos[0].get<long long>(), pos[1].get<long long>()};
      const json& attrs = field(o, "attributes", octx);
      if (!attrs.is_object()) fail(ErrorKind::kParse, octx + ": attributes must be an object");
      for (const auto& [name, value] : attrs.items()) {
        if (!value.is_string()) {
          fail(ErrorKind::kParse, octx + ": value of '" + name + "' must be a string");
        }
        obj.attributes.emplace(name, value.get<std::string>());
      }
      scene.objects.push_back(std::move(obj));
    }
    for (const json& e : array_field(s, "edges", ctx)) {
      expect_keys(e, ctx + ".edge", {"subject", "relation", "object"});
      scene.edges.push_back({string_field(e, "subject", ctx + ".edge"),
                             string_field(e, "relation", ctx + ".edge"),
                             string_field(e, "object", ctx + ".edge")});
    }
    scenes.push_back(std::move(scene));
  }

  std::vector<Trial> trials;
  for (const json& t : array_field(doc, "trials", "corpus")) {
    expect_keys(t, "trial", {"id", "scene", "target", "speaker", "gold"});
    Trial trial;
    trial.id = string_field(t, "id", "trial");
    const std::string ctx = "trial '" + trial.id + "'";
    trial.scene = string_field(t, "scene", ctx);
    trial.target = string_field(t, "target", ctx);
    trial.speaker = string_field(t, "speaker", ctx);
    trial.gold = json_io::content_from_json(field(t, "gold", ctx), ctx + ".gold");
    trials.push_back(std::move(trial));
  }

  return Corpus(std::move(attributes), std::move(relations), std::move(speakers),
                std::move(scenes), std::move(trials));
}

std::string save_corpus(const Corpus& corpus) {
  json doc = json::object();
  doc["version"] = 1;
  doc["attributes"] = corpus.attributes();
  doc["relations"] = corpus.relations();
  json speakers = json::array();
  for (const auto& s : corpus.speakers()) {
    speakers.push_back({{"id", s.id},
                        {"gender", std::string(to_string(s.gender))},
                        {"age_bracket", s.age_bracket}});
  }
  doc["speakers"] = std::move(speakers);
  json scenes = json::array();
  for (const auto& s : corpus.scenes()) {
    json objects = json::array();
    for (const auto& o : s.objects) {
      objects.push_back({{"id", o.id},
                         {"position", {o.position.x, o.position.y}},
                         {"attributes", o.attributes}});
    }
    json edges = json::array();
    for (const auto& e : s.edges) {
      edges.push_back({{"subject", e.subject},
                       {"relation", e.relation},
                       {"object", e.object}});
    }
    scenes.push_back({{"id", s.id}, {"objects", std::move(objects)},
                      {"edges", std::move(edges)}});
  }
  doc["scenes"] = std::move(scenes);
  json trials = json::array();
  for (const auto& t : corpus.trials()) {
    trials.push_back({{"id", t.id},
                      {"scene", t.scene},
                      {"target", t.target},
                      {"speaker", t.speaker},
                      {"gold", json_io::content_to_json(t.gold)}});
  }
  doc["trials"] = std::move(trials);
  return doc.dump(1) + "\n";
}

}  // namespace reg
