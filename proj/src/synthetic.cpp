#include "reg/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <set>
#include <utility>

#include "json_io.hpp"
#include "reg/error.hpp"
#include "reg/random.hpp"

namespace reg {

using json_io::json;

SyntheticConfig parse_synthetic_config(std::string_view json_text) {
  const json doc = json_io::parse(json_text, "generator config");
  const char* ctx = "config";
  json_io::expect_keys(
      doc, ctx,
      {"attributes", "relations", "min_objects", "max_objects", "grid_size",
       "neighbour_radius", "speakers", "trials_per_speaker",
       "mixed_overspec_rate", "relational_speaker_rate", "preference_order",
       "preference_swap_rate", "max_retries"});

  SyntheticConfig cfg;
  const json& attrs = json_io::field(doc, "attributes", ctx);
  if (!attrs.is_object()) fail(ErrorKind::kParse, "config.attributes must be an object");
  for (const auto& [name, values] : attrs.items()) {
    if (!values.is_array()) {
      fail(ErrorKind::kParse, "config.attributes." + name + " must be an array");
    }
    for (const json& v : values) {
      if (!v.is_string()) {
        fail(ErrorKind::kParse, "config.attributes." + name + " must hold strings");
      }
      cfg.attributes[name].push_back(v.get<std::string>());
    }
  }
  if (auto it = doc.find("relations"); it != doc.end()) {
    if (!it->is_array()) fail(ErrorKind::kParse, "config.relations must be an array");
    for (const json& r : *it) {
      json_io::expect_keys(r, "config.relations[]", {"label", "axis", "direction"});
      RelationRule rule;
      rule.label = json_io::string_field(r, "label", "config.relations[]");
      std::string axis = r.contains("axis")
                             ? json_io::string_field(r, "axis", "config.relations[]")
                             : "horizontal";
      if (axis == "horizontal") {
        rule.axis = RelationRule::Axis::kHorizontal;
      } else if (axis == "vertical") {
        rule.axis = RelationRule::Axis::kVertical;
      } else {
        fail(ErrorKind::kParse, "config.relations[]: unknown axis '" + axis + "'");
      }
      std::string dir = r.contains("direction")
                            ? json_io::string_field(r, "direction", "config.relations[]")
                            : "any";
      if (dir == "any") {
        rule.direction = RelationRule::Direction::kAny;
      } else if (dir == "increasing") {
        rule.direction = RelationRule::Direction::kIncreasing;
      } else if (dir == "decreasing") {
        rule.direction = RelationRule::Direction::kDecreasing;
      } else {
        fail(ErrorKind::kParse, "config.relations[]: unknown direction '" + dir + "'");
      }
      cfg.relations.push_back(std::move(rule));
    }
  }
  auto int_opt = [&](const char* key, int& out) {
    if (doc.contains(key)) out = static_cast<int>(json_io::integer_field(doc, key, ctx));
  };
  auto real_opt = [&](const char* key, double& out) {
    if (doc.contains(key)) out = json_io::number_field(doc, key, ctx);
  };
  int_opt("min_objects", cfg.min_objects);
  int_opt("max_objects", cfg.max_objects);
  int_opt("grid_size", cfg.grid_size);
  int_opt("neighbour_radius", cfg.neighbour_radius);
  int_opt("trials_per_speaker", cfg.trials_per_speaker);
  int_opt("max_retries", cfg.max_retries);
  real_opt("mixed_overspec_rate", cfg.mixed_overspec_rate);
  real_opt("relational_speaker_rate", cfg.relational_speaker_rate);
  real_opt("preference_swap_rate", cfg.preference_swap_rate);
  if (auto it = doc.find("preference_order"); it != doc.end()) {
    if (!it->is_array()) fail(ErrorKind::kParse, "config.preference_order must be an array");
    for (const json& v : *it) {
      if (!v.is_string()) fail(ErrorKind::kParse, "config.preference_order must hold strings");
      cfg.preference_order.push_back(v.get<std::string>());
    }
  }

  const json& speakers = json_io::field(doc, "speakers", ctx);
  json_io::expect_keys(speakers, "config.speakers",
                       {"overspecifier", "minimalist", "mixed"});
  auto count = [&](const char* key, int& out) {
    if (speakers.contains(key)) {
      out = static_cast<int>(json_io::integer_field(speakers, key, "config.speakers"));
    }
  };
  count("overspecifier", cfg.overspecifiers);
  count("minimalist", cfg.minimalists);
  count("mixed", cfg.mixed);
  return cfg;
}

namespace {

void validate(const SyntheticConfig& cfg) {
  auto bad = [](const std::string& msg) {
    fail(ErrorKind::kInvalidArgument, "invalid generator config: " + msg);
  };
  if (cfg.attributes.empty()) bad("no attributes");
  for (const auto& [name, values] : cfg.attributes) {
    if (values.empty()) bad("attribute '" + name + "' has no values");
    std::set<std::string> distinct(values.begin(), values.end());
    if (distinct.size() != values.size()) bad("attribute '" + name + "' repeats a value");
    if (distinct.contains("")) bad("attribute '" + name + "' has an empty value");
  }
  std::set<std::string> labels;
  for (const auto& r : cfg.relations) {
    if (r.label.empty() || r.label == kNoRelation) bad("bad relation label '" + r.label + "'");
    labels.insert(r.label);
  }
  if (cfg.min_objects < 2) bad("min_objects must be >= 2");
  if (cfg.max_objects < cfg.min_objects) bad("max_objects < min_objects");
  if (cfg.grid_size < 1 ||
      static_cast<long long>(cfg.grid_size) * cfg.grid_size < cfg.max_objects) {
    bad("grid too small for max_objects");
  }
  if (cfg.neighbour_radius < 1) bad("neighbour_radius must be >= 1");
  if (cfg.overspecifiers < 0 || cfg.minimalists < 0 || cfg.mixed < 0) {
    bad("negative speaker count");
  }
  if (cfg.overspecifiers + cfg.minimalists + cfg.mixed == 0) bad("no speakers");
  if (cfg.trials_per_speaker < 1) bad("trials_per_speaker must be >= 1");
  if (!(cfg.mixed_overspec_rate >= 0.0 && cfg.mixed_overspec_rate <= 1.0)) {
    bad("mixed_overspec_rate outside [0, 1]");
  }
  if (!(cfg.relational_speaker_rate >= 0.0 && cfg.relational_speaker_rate <= 1.0)) {
    bad("relational_speaker_rate outside [0, 1]");
  }
  if (!(cfg.preference_swap_rate >= 0.0 && cfg.preference_swap_rate <= 1.0)) {
    bad("preference_swap_rate outside [0, 1]");
  }
  if (!cfg.preference_order.empty()) {
    std::set<std::string> order(cfg.preference_order.begin(), cfg.preference_order.end());
    std::set<std::string> names;
    for (const auto& [name, values] : cfg.attributes) names.insert(name);
    if (order != names || order.size() != cfg.preference_order.size()) {
      bad("preference_order must list every attribute exactly once");
    }
  }
  if (cfg.max_retries < 1) bad("max_retries must be >= 1");
}

struct SpeakerModel {
  SpeakerInfo info;
  SpeakerProfile profile;
  std::vector<std::string> ranking;  // most preferred first
  bool relational = false;
};

std::string numbered(std::string_view prefix, std::size_t n, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*zu", width, n);
  return std::string(prefix) + buf;
}

Scene make_scene(const SyntheticConfig& cfg, std::string id, Rng& rng) {
  Scene scene;
  scene.id = std::move(id);
  const int n = static_cast<int>(rng.between(cfg.min_objects, cfg.max_objects));
  std::set<std::pair<long long, long long>> used;
  for (int i = 0; i < n; ++i) {
    ObjectSpec o;
    o.id = "o" + std::to_string(i + 1);
    for (const auto& [name, values] : cfg.attributes) {
      o.attributes[name] = values[rng.below(values.size())];
    }
    do {
      o.position = {rng.between(0, cfg.grid_size - 1),
                    rng.between(0, cfg.grid_size - 1)};
    } while (!used.emplace(o.position.x, o.position.y).second);
    scene.objects.push_back(std::move(o));
  }
  for (const auto& a : scene.objects) {
    for (const auto& b : scene.objects) {
      if (a.id == b.id) continue;
      const long long dx = b.position.x - a.position.x;
      const long long dy = b.position.y - a.position.y;
      if (std::max(std::llabs(dx), std::llabs(dy)) > cfg.neighbour_radius) continue;
      const bool horizontal = std::llabs(dx) >= std::llabs(dy);
      for (const auto& rule : cfg.relations) {
        if (horizontal != (rule.axis == RelationRule::Axis::kHorizontal)) continue;
        const long long d = horizontal ? dx : dy;
        if (rule.direction == RelationRule::Direction::kIncreasing && d <= 0) continue;
        if (rule.direction == RelationRule::Direction::kDecreasing && d >= 0) continue;
        scene.edges.push_back({a.id, rule.label, b.id});
      }
    }
  }
  return scene;
}

bool distinguishes(const Scene& scene, const std::string& target,
                   const DescriptionContent& c) {
  const auto r = resolve(scene, c);
  return r.size() == 1 && *r.begin() == target;
}

// One removable piece of a description under construction.
struct Atom {
  enum class Kind { kTargetAttribute, kRelation, kLandmarkAttribute } kind;
  std::string attribute;
};

DescriptionContent assemble(const std::vector<Atom>& atoms, const ObjectSpec& target,
                            const ObjectSpec* landmark, const std::string& label) {
  DescriptionContent c;
  bool relation = false;
  DescriptionContent lm;
  for (const auto& a : atoms) {
    switch (a.kind) {
      case Atom::Kind::kTargetAttribute:
        c.attributes[a.attribute] = *target.value_of(a.attribute);
        break;
      case Atom::Kind::kRelation:
        relation = true;
        break;
      case Atom::Kind::kLandmarkAttribute:
        lm.attributes[a.attribute] = *landmark->value_of(a.attribute);
        break;
    }
  }
  if (relation) c.set_relation(label, std::move(lm));
  return c;
}

// Incremental selection along the speaker's ranking followed by reverse-order
// pruning. The result is minimal: no single atom can be dropped, and dropping
// more never helps because denotations only shrink as content grows.
std::optional<DescriptionContent> minimal_description(const Scene& scene,
                                                      const ObjectSpec& target,
                                                      const SpeakerModel& speaker) {
  std::vector<Atom> atoms;
  const ObjectSpec* landmark = nullptr;
  std::string label;
  if (speaker.relational) {
    if (auto lm = nearest_landmark(scene, target.id)) {
      landmark = &scene.object(lm->object);
      label = lm->relation;
      atoms.push_back({Atom::Kind::kRelation, {}});
      atoms.push_back({Atom::Kind::kLandmarkAttribute, speaker.ranking.front()});
    }
  }
  auto current = [&] { return assemble(atoms, target, landmark, label); };
  auto denotation = resolve(scene, current());
  for (const auto& a : speaker.ranking) {
    if (denotation.size() == 1) break;
    atoms.push_back({Atom::Kind::kTargetAttribute, a});
    auto next = resolve(scene, current());
    if (next.size() < denotation.size()) {
      denotation = std::move(next);
    } else {
      atoms.pop_back();
    }
  }
  if (!distinguishes(scene, target.id, current())) return std::nullopt;

  for (std::size_t i = atoms.size(); i-- > 0;) {
    std::vector<Atom> trial = atoms;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
    if (atoms[i].kind == Atom::Kind::kRelation) {
      std::erase_if(trial, [](const Atom& a) {
        return a.kind == Atom::Kind::kLandmarkAttribute;
      });
    }
    if (distinguishes(scene, target.id, assemble(trial, target, landmark, label))) {
      atoms = std::move(trial);
    }
  }
  return current();
}

std::optional<DescriptionContent> describe(const Scene& scene,
                                           const ObjectSpec& target,
                                           const SpeakerModel& speaker,
                                           ReferenceType wanted) {
  auto content = minimal_description(scene, target, speaker);
  if (!content) return std::nullopt;
  if (wanted == ReferenceType::kOverspecified) {
    auto extra = std::find_if(
        speaker.ranking.begin(), speaker.ranking.end(),
        [&](const std::string& a) { return !content->attributes.contains(a); });
    if (extra == speaker.ranking.end()) return std::nullopt;
    content->attributes[*extra] = *target.value_of(*extra);
  }
  if (classify_reference_type(scene, target.id, *content) != wanted) {
    return std::nullopt;
  }
  return content;
}

}  // namespace

SyntheticCorpus generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed) {
  validate(cfg);
  Rng rng(derive_seed(seed, "synthetic"));

  std::vector<std::string> attribute_names;
  for (const auto& [name, values] : cfg.attributes) attribute_names.push_back(name);

  std::vector<SpeakerProfile> categories;
  categories.insert(categories.end(), cfg.overspecifiers, SpeakerProfile::kOverspecifier);
  categories.insert(categories.end(), cfg.minimalists, SpeakerProfile::kMinimalist);
  categories.insert(categories.end(), cfg.mixed, SpeakerProfile::kMixed);
  rng.shuffle(categories);

  std::vector<SpeakerModel> speakers;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    SpeakerModel s;
    s.info.id = numbered("spk", i + 1, 2);
    s.info.gender = rng.bernoulli(0.5) ? Gender::kFemale : Gender::kMale;
    s.info.age_bracket = static_cast<int>(rng.between(1, 4));
    s.profile = categories[i];
    if (cfg.preference_order.empty()) {
      s.ranking = attribute_names;
      rng.shuffle(s.ranking);
    } else {
      s.ranking = cfg.preference_order;
      for (std::size_t j = 0; j + 1 < s.ranking.size(); ++j) {
        if (rng.bernoulli(cfg.preference_swap_rate)) std::swap(s.ranking[j], s.ranking[j + 1]);
      }
    }
    s.relational = !cfg.relations.empty() && rng.bernoulli(cfg.relational_speaker_rate);
    speakers.push_back(std::move(s));
  }

  std::vector<Scene> scenes;
  std::vector<Trial> trials;
  for (const auto& speaker : speakers) {
    for (int k = 0; k < cfg.trials_per_speaker; ++k) {
      const std::size_t n = trials.size() + 1;
      ReferenceType wanted = ReferenceType::kMinimal;
      if (speaker.profile == SpeakerProfile::kOverspecifier ||
          (speaker.profile == SpeakerProfile::kMixed &&
           rng.bernoulli(cfg.mixed_overspec_rate))) {
        wanted = ReferenceType::kOverspecified;
      }
      bool done = false;
      for (int attempt = 0; attempt < cfg.max_retries && !done; ++attempt) {
        Scene scene = make_scene(cfg, numbered("sc", n, 4), rng);
        const ObjectSpec& target = scene.objects[rng.below(scene.objects.size())];
        auto gold = describe(scene, target, speaker, wanted);
        if (!gold) continue;
        trials.push_back({numbered("t", n, 4), scene.id, target.id,
                          speaker.info.id, std::move(*gold)});
        scenes.push_back(std::move(scene));
        done = true;
      }
      if (!done) {
        fail(ErrorKind::kRuntime,
             "trial " + numbered("t", n, 4) + " of speaker " + speaker.info.id +
                 ": no " + std::string(to_string(wanted)) +
                 " description found after " + std::to_string(cfg.max_retries) +
                 " scenes");
      }
    }
  }

  std::vector<std::string> relation_labels;
  for (const auto& r : cfg.relations) relation_labels.push_back(r.label);
  std::vector<SpeakerInfo> infos;
  std::map<std::string, SpeakerProfile> profiles;
  for (const auto& s : speakers) {
    infos.push_back(s.info);
    profiles[s.info.id] = s.profile;
  }
  return {Corpus(attribute_names, relation_labels, std::move(infos),
                 std::move(scenes), std::move(trials)),
          std::move(profiles)};
}

}  // namespace reg
