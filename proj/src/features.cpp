#include "reg/features.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "reg/error.hpp"

namespace reg {

namespace {

std::vector<std::string> sorted_unique(std::vector<std::string> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

template <typename F>
std::vector<std::string> block(const std::vector<std::string>& keys, F&& name) {
  std::vector<std::string> out;
  for (const auto& k : keys) out.push_back(name(k));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

FeatureSchema::FeatureSchema(std::vector<std::string> attributes,
                             std::vector<std::string> relations,
                             std::vector<std::string> size_values,
                             std::vector<std::string> speaker_ids,
                             bool include_speaker_ids)
    : attributes_(sorted_unique(std::move(attributes))),
      relations_(sorted_unique(std::move(relations))),
      size_values_(sorted_unique(std::move(size_values))),
      speaker_ids_(sorted_unique(std::move(speaker_ids))),
      include_speaker_ids_(include_speaker_ids) {
  std::vector<std::string> context{"lm_size", "tg_size"};
  for (const auto& r : relations_) context.push_back("rel_is_" + r);
  for (const auto& a : attributes_) {
    context.push_back("shares_tg_" + a);
    context.push_back("shares_lm_" + a);
  }
  std::sort(context.begin(), context.end());

  names_ = context;
  if (include_speaker_ids_) {
    for (auto& n : block(speaker_ids_, [](const auto& s) { return "spk_is_" + s; })) {
      names_.push_back(std::move(n));
    }
  }
  names_.push_back("gender_is_female");
  names_.push_back("gender_is_male");
  names_.push_back("age_bracket");
  for (auto& n : block(attributes_, [](const auto& a) { return "pref_tg_" + a; })) {
    names_.push_back(std::move(n));
  }
  for (auto& n : block(attributes_, [](const auto& a) { return "pref_lm_" + a; })) {
    names_.push_back(std::move(n));
  }
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (!index_.emplace(names_[i], i).second) {
      fail(ErrorKind::kInvalidArgument, "feature name collision: " + names_[i]);
    }
  }
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

double FeatureSchema::size_rank(const std::string* value) const {
  if (value == nullptr) return 0.0;
  auto it = std::lower_bound(size_values_.begin(), size_values_.end(), *value);
  if (it == size_values_.end() || *it != *value) return 0.0;
  return static_cast<double>(it - size_values_.begin() + 1);
}

SpeakerPreferences compute_speaker_preferences(std::span<const Trial* const> trials) {
  SpeakerPreferences prefs;
  std::map<std::string, std::size_t> tg, lm;
  for (const Trial* t : trials) {
    ++prefs.trials;
    for (const auto& [name, value] : t->gold.attributes) ++tg[name];
    if (t->gold.has_relation()) {
      ++prefs.landmark_trials;
      for (const auto& [name, value] : t->gold.landmark().attributes) ++lm[name];
    }
  }
  for (const auto& [name, n] : tg) {
    prefs.target_freq[name] = static_cast<double>(n) / static_cast<double>(prefs.trials);
  }
  for (const auto& [name, n] : lm) {
    prefs.landmark_freq[name] =
        static_cast<double>(n) / static_cast<double>(prefs.landmark_trials);
  }
  return prefs;
}

namespace {

double sharing_count(const Scene& scene, const ObjectSpec& entity,
                     const std::string& attribute) {
  const std::string* mine = entity.value_of(attribute);
  if (mine == nullptr) return 0.0;
  double n = 0.0;
  for (const auto& o : scene.objects) {
    if (o.id == entity.id) continue;
    const std::string* theirs = o.value_of(attribute);
    if (theirs != nullptr && *theirs == *mine) n += 1.0;
  }
  return n;
}

}  // namespace

FeatureMap extract_context_features(const FeatureSchema& schema,
                                    const Scene& scene, std::string_view entity,
                                    const std::optional<LandmarkRef>& landmark) {
  const ObjectSpec& e = scene.object(entity);
  const ObjectSpec* lm = landmark ? &scene.object(landmark->object) : nullptr;

  FeatureMap f;
  f["tg_size"] = schema.size_rank(e.value_of(kSizeAttribute));
  f["lm_size"] = lm ? schema.size_rank(lm->value_of(kSizeAttribute)) : 0.0;
  for (const auto& r : schema.relations()) {
    f["rel_is_" + r] = (landmark && landmark->relation == r) ? 1.0 : 0.0;
  }
  for (const auto& a : schema.attributes()) {
    f["shares_tg_" + a] = sharing_count(scene, e, a);
    f["shares_lm_" + a] = lm ? sharing_count(scene, *lm, a) : 0.0;
  }
  return f;
}

FeatureMap extract_speaker_features(const SpeakerInfo& speaker,
                                    const SpeakerPreferences& prefs,
                                    const FeatureSchema& schema) {
  FeatureMap f;
  if (schema.include_speaker_ids()) {
    for (const auto& id : schema.speaker_ids()) {
      f["spk_is_" + id] = id == speaker.id ? 1.0 : 0.0;
    }
  }
  f["gender_is_female"] = speaker.gender == Gender::kFemale ? 1.0 : 0.0;
  f["gender_is_male"] = speaker.gender == Gender::kMale ? 1.0 : 0.0;
  f["age_bracket"] = static_cast<double>(speaker.age_bracket);
  for (const auto& a : schema.attributes()) {
    auto tg = prefs.target_freq.find(a);
    auto lm = prefs.landmark_freq.find(a);
    f["pref_tg_" + a] = tg == prefs.target_freq.end() ? 0.0 : tg->second;
    f["pref_lm_" + a] = lm == prefs.landmark_freq.end() ? 0.0 : lm->second;
  }
  return f;
}

Vector encode(const FeatureMap& features, const FeatureSchema& schema) {
  Vector v(schema.dimension(), 0.0);
  for (const auto& [name, value] : features) {
    auto idx = schema.index_of(name);
    if (!idx) {
      fail(ErrorKind::kInvalidArgument, "schema drift: feature '" + name +
                                            "' is not in the frozen schema");
    }
    v[*idx] = value;
  }
  return v;
}

Scaler fit_scaler(const Matrix& rows) {
  if (rows.empty()) fail(ErrorKind::kInvalidArgument, "cannot fit a scaler on zero rows");
  const std::size_t d = rows.front().size();
  Scaler s{Vector(d, 0.0), Vector(d, 0.0)};
  for (const auto& r : rows) {
    if (r.size() != d) fail(ErrorKind::kInvalidArgument, "ragged rows in scaler fit");
    for (std::size_t j = 0; j < d; ++j) s.mean[j] += r[j];
  }
  const double n = static_cast<double>(rows.size());
  for (auto& m : s.mean) m /= n;
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < d; ++j) {
      const double dev = r[j] - s.mean[j];
      s.stddev[j] += dev * dev;
    }
  }
  for (auto& sd : s.stddev) {
    sd = std::sqrt(sd / n);
    if (sd < 1e-12) sd = 1.0;
  }
  return s;
}

Vector apply_scaler(const Scaler& scaler, const Vector& x) {
  if (x.size() != scaler.mean.size()) {
    fail(ErrorKind::kInvalidArgument, "dimension mismatch: vector has " +
                                          std::to_string(x.size()) +
                                          " features, scaler expects " +
                                          std::to_string(scaler.mean.size()));
  }
  Vector out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = (x[j] - scaler.mean[j]) / scaler.stddev[j];
  }
  return out;
}

}  // namespace reg
