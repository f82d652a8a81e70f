// Model persistence: one canonical JSON document per RegModel.

#include <string>

#include "json_io.hpp"
#include "reg/error.hpp"
#include "model_json.hpp"
#include "reg/regmodel.hpp"

namespace reg {

namespace {

using json_io::expect_keys;
using json_io::field;
using json_io::json;

constexpr int kModelVersion = 1;

json params_to_json(const SvmParams& p) {
  return {{"C", p.C},
          {"gamma", p.gamma},
          {"tol", p.tol},
          {"max_passes", p.max_passes},
          {"max_iters", p.max_iters},
          {"seed", p.seed}};
}

SvmParams params_from_json(const json& j) {
  expect_keys(j, "params", {"C", "gamma", "tol", "max_passes", "max_iters", "seed"});
  SvmParams p;
  p.C = json_io::number_field(j, "C", "params");
  p.gamma = json_io::number_field(j, "gamma", "params");
  p.tol = json_io::number_field(j, "tol", "params");
  p.max_passes = static_cast<int>(json_io::integer_field(j, "max_passes", "params"));
  p.max_iters = json_io::integer_field(j, "max_iters", "params");
  p.seed = field(j, "seed", "params").get<std::uint64_t>();
  return p;
}

json binary_to_json(const BinarySvmModel& m) {
  json out = {{"params", params_to_json(m.params)},
              {"dimension", m.dimension},
              {"bias", m.bias},
              {"support_vectors", m.support_vectors},
              {"coefficients", m.coefficients},
              {"report",
               {{"iterations", m.report.iterations},
                {"hit_iteration_cap", m.report.hit_iteration_cap},
                {"max_kkt_violation", m.report.max_kkt_violation},
                {"max_alpha", m.report.max_alpha},
                {"min_alpha", m.report.min_alpha},
                {"sum_alpha_y", m.report.sum_alpha_y}}}};
  out["constant_label"] = m.constant_label ? json(*m.constant_label) : json(nullptr);
  return out;
}

BinarySvmModel binary_from_json(const json& j) {
  const char* ctx = "binary model";
  expect_keys(j, ctx, {"params", "dimension", "bias", "support_vectors",
                       "coefficients", "report", "constant_label"});
  BinarySvmModel m;
  m.params = params_from_json(field(j, "params", ctx));
  m.dimension = field(j, "dimension", ctx).get<std::size_t>();
  m.bias = json_io::number_field(j, "bias", ctx);
  m.support_vectors = field(j, "support_vectors", ctx).get<Matrix>();
  m.coefficients = field(j, "coefficients", ctx).get<Vector>();
  if (m.support_vectors.size() != m.coefficients.size()) {
    fail(ErrorKind::kParse, "binary model: support vector / coefficient count mismatch");
  }
  for (const auto& sv : m.support_vectors) {
    if (sv.size() != m.dimension) fail(ErrorKind::kParse, "binary model: bad support vector size");
  }
  const json& r = field(j, "report", ctx);
  expect_keys(r, "report", {"iterations", "hit_iteration_cap", "max_kkt_violation",
                            "max_alpha", "min_alpha", "sum_alpha_y"});
  m.report.iterations = json_io::integer_field(r, "iterations", "report");
  m.report.hit_iteration_cap = field(r, "hit_iteration_cap", "report").get<bool>();
  m.report.max_kkt_violation = json_io::number_field(r, "max_kkt_violation", "report");
  m.report.max_alpha = json_io::number_field(r, "max_alpha", "report");
  m.report.min_alpha = json_io::number_field(r, "min_alpha", "report");
  m.report.sum_alpha_y = json_io::number_field(r, "sum_alpha_y", "report");
  const json& c = field(j, "constant_label", ctx);
  if (!c.is_null()) m.constant_label = c.get<int>();
  return m;
}

json multiclass_to_json(const MulticlassModel& m) {
  json pairs = json::array();
  for (const auto& [key, model] : m.pairwise) {
    pairs.push_back({{"i", key.first}, {"j", key.second}, {"model", binary_to_json(model)}});
  }
  return {{"classes", m.classes}, {"dimension", m.dimension}, {"pairwise", pairs}};
}

MulticlassModel multiclass_from_json(const json& j) {
  const char* ctx = "multiclass model";
  expect_keys(j, ctx, {"classes", "dimension", "pairwise"});
  MulticlassModel m;
  m.classes = field(j, "classes", ctx).get<std::vector<std::string>>();
  m.dimension = field(j, "dimension", ctx).get<std::size_t>();
  for (const json& p : field(j, "pairwise", ctx)) {
    expect_keys(p, "pairwise", {"i", "j", "model"});
    const auto i = field(p, "i", "pairwise").get<std::size_t>();
    const auto k = field(p, "j", "pairwise").get<std::size_t>();
    if (!(i < k && k < m.classes.size())) fail(ErrorKind::kParse, "bad pairwise index");
    m.pairwise.emplace(std::make_pair(i, k), binary_from_json(field(p, "model", "pairwise")));
  }
  const std::size_t c = m.classes.size();
  if (m.pairwise.size() != c * (c - (c > 0 ? 1 : 0)) / 2) {
    fail(ErrorKind::kParse, "multiclass model: wrong number of pairwise models");
  }
  return m;
}

json preferences_to_json(const SpeakerPreferences& p) {
  return {{"target", p.target_freq},
          {"landmark", p.landmark_freq},
          {"trials", p.trials},
          {"landmark_trials", p.landmark_trials}};
}

SpeakerPreferences preferences_from_json(const json& j) {
  expect_keys(j, "preferences", {"target", "landmark", "trials", "landmark_trials"});
  SpeakerPreferences p;
  p.target_freq = field(j, "target", "preferences").get<std::map<std::string, double>>();
  p.landmark_freq = field(j, "landmark", "preferences").get<std::map<std::string, double>>();
  p.trials = field(j, "trials", "preferences").get<std::size_t>();
  p.landmark_trials = field(j, "landmark_trials", "preferences").get<std::size_t>();
  return p;
}

GridRecord grid_record_from_json(const json& j) {
  const char* ctx = "grid record";
  expect_keys(j, ctx, {"classifier", "best", "log", "train_rows", "validation_rows",
                       "validated_on_train"});
  GridRecord g;
  g.classifier = json_io::string_field(j, "classifier", ctx);
  g.best = params_from_json(field(j, "best", ctx));
  for (const json& pt : field(j, "log", ctx)) {
    expect_keys(pt, "grid point", {"C", "gamma", "accuracy"});
    g.log.push_back({json_io::number_field(pt, "C", "grid point"),
                     json_io::number_field(pt, "gamma", "grid point"),
                     json_io::number_field(pt, "accuracy", "grid point")});
  }
  g.train_rows = field(j, "train_rows", ctx).get<std::size_t>();
  g.validation_rows = field(j, "validation_rows", ctx).get<std::size_t>();
  g.validated_on_train = field(j, "validated_on_train", ctx).get<bool>();
  return g;
}

}  // namespace

namespace json_io {

json grid_record_to_json(const GridRecord& g) {
  json log = json::array();
  for (const auto& pt : g.log) {
    log.push_back({{"C", pt.C}, {"gamma", pt.gamma}, {"accuracy", pt.accuracy}});
  }
  return {{"classifier", g.classifier},
          {"best", params_to_json(g.best)},
          {"log", log},
          {"train_rows", g.train_rows},
          {"validation_rows", g.validation_rows},
          {"validated_on_train", g.validated_on_train}};
}

}  // namespace json_io

std::string save_model(const RegModel& model) {
  json doc = json::object();
  doc["version"] = kModelVersion;
  doc["schema"] = {{"attributes", model.schema.attributes()},
                   {"relations", model.schema.relations()},
                   {"size_values", model.schema.size_values()},
                   {"speaker_ids", model.schema.speaker_ids()},
                   {"include_speaker_ids", model.schema.include_speaker_ids()},
                   {"names", model.schema.names()}};
  doc["scaler"] = {{"mean", model.scaler.mean}, {"stddev", model.scaler.stddev}};
  json prefs = json::object();
  for (const auto& [id, p] : model.preferences) prefs[id] = preferences_to_json(p);
  doc["speaker_preferences"] = prefs;
  doc["fallback_preferences"] = preferences_to_json(model.fallback_preferences);
  json classifiers = json::object();
  for (const auto& [level, lc] : model.levels) {
    json attrs = json::object();
    for (const auto& [a, m] : lc.attributes) attrs[a] = binary_to_json(m);
    classifiers[std::to_string(level)] = {{"trained", lc.trained},
                                          {"attributes", attrs},
                                          {"relation", multiclass_to_json(lc.relation)}};
  }
  doc["classifiers"] = classifiers;
  json grid = json::array();
  for (const auto& g : model.metadata.grid) grid.push_back(json_io::grid_record_to_json(g));
  doc["metadata"] = {{"method", model.metadata.method},
                     {"seed", model.metadata.seed},
                     {"grid", grid}};
  return doc.dump(1) + "\n";
}

RegModel load_model(std::string_view text) {
  try {
    const json doc = json_io::parse(text, "model");
    const char* ctx = "model";
    expect_keys(doc, ctx, {"version", "schema", "scaler", "speaker_preferences",
                           "fallback_preferences", "classifiers", "metadata"});
    if (json_io::integer_field(doc, "version", ctx) != kModelVersion) {
      fail(ErrorKind::kParse, "unsupported model version");
    }
    RegModel m;
    const json& s = field(doc, "schema", ctx);
    expect_keys(s, "schema", {"attributes", "relations", "size_values", "speaker_ids",
                              "include_speaker_ids", "names"});
    using Strings = std::vector<std::string>;
    m.schema = FeatureSchema(field(s, "attributes", "schema").get<Strings>(),
                             field(s, "relations", "schema").get<Strings>(),
                             field(s, "size_values", "schema").get<Strings>(),
                             field(s, "speaker_ids", "schema").get<Strings>(),
                             field(s, "include_speaker_ids", "schema").get<bool>());
    if (m.schema.names() != field(s, "names", "schema").get<Strings>()) {
      fail(ErrorKind::kParse, "model schema names are inconsistent with its inventory");
    }
    const json& sc = field(doc, "scaler", ctx);
    expect_keys(sc, "scaler", {"mean", "stddev"});
    m.scaler.mean = field(sc, "mean", "scaler").get<Vector>();
    m.scaler.stddev = field(sc, "stddev", "scaler").get<Vector>();
    if (m.scaler.mean.size() != m.schema.dimension() ||
        m.scaler.stddev.size() != m.schema.dimension()) {
      fail(ErrorKind::kParse, "scaler dimension does not match schema");
    }
    for (const auto& [id, p] : field(doc, "speaker_preferences", ctx).items()) {
      m.preferences[id] = preferences_from_json(p);
    }
    m.fallback_preferences = preferences_from_json(field(doc, "fallback_preferences", ctx));
    for (const auto& [key, lc] : field(doc, "classifiers", ctx).items()) {
      expect_keys(lc, "classifiers", {"trained", "attributes", "relation"});
      LevelClassifiers level;
      level.trained = field(lc, "trained", "classifiers").get<bool>();
      for (const auto& [a, bm] : field(lc, "attributes", "classifiers").items()) {
        level.attributes[a] = binary_from_json(bm);
      }
      level.relation = multiclass_from_json(field(lc, "relation", "classifiers"));
      m.levels[std::stoi(key)] = std::move(level);
    }
    const json& md = field(doc, "metadata", ctx);
    expect_keys(md, "metadata", {"method", "seed", "grid"});
    m.metadata.method = json_io::string_field(md, "method", "metadata");
    m.metadata.seed = field(md, "seed", "metadata").get<std::uint64_t>();
    for (const json& g : field(md, "grid", "metadata")) {
      m.metadata.grid.push_back(grid_record_from_json(g));
    }
    return m;
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, std::string("corrupt model document: ") + e.what());
  } catch (const std::invalid_argument& e) {
    fail(ErrorKind::kParse, std::string("corrupt model document: ") + e.what());
  }
}

}  // namespace reg
