#include "reg/training.hpp"

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <set>

#include "json_io.hpp"
#include "model_json.hpp"
#include "parallel.hpp"
#include "reg/error.hpp"
#include "reg/random.hpp"

namespace reg {

std::string_view to_string(TrainingMethod method) {
  return method == TrainingMethod::kSpeaker ? "speaker" : "profile";
}

TrainingMethod parse_method(std::string_view name) {
  if (name == "speaker") return TrainingMethod::kSpeaker;
  if (name == "profile") return TrainingMethod::kProfile;
  fail(ErrorKind::kInvalidArgument, "unknown training method '" + std::string(name) + "'");
}

int FoldAssignment::fold_of(std::string_view trial_id) const {
  auto it = assignment.find(std::string(trial_id));
  if (it == assignment.end()) {
    fail(ErrorKind::kNotFound, "trial '" + std::string(trial_id) + "' has no fold");
  }
  return it->second;
}

FoldAssignment assign_folds(const Corpus& corpus, int k, std::uint64_t seed,
                            bool allow_sparse) {
  if (k < 3) {
    fail(ErrorKind::kProtocol,
         "need at least 3 folds (train, validation, test); got " + std::to_string(k));
  }
  std::map<std::string, std::vector<std::string>> by_speaker;
  for (const auto& s : corpus.speakers()) by_speaker[s.id];
  for (const auto& t : corpus.trials()) by_speaker[t.speaker].push_back(t.id);

  FoldAssignment folds;
  folds.k = k;
  std::string offenders;
  for (const auto& [speaker, ids] : by_speaker) {
    if (ids.empty()) continue;
    if (ids.size() < static_cast<std::size_t>(k)) {
      folds.sparse_speakers.push_back(speaker);
      offenders += (offenders.empty() ? "" : ", ") + speaker + " (" +
                   std::to_string(ids.size()) + ")";
    }
  }
  if (!offenders.empty() && !allow_sparse) {
    fail(ErrorKind::kProtocol, "speakers with fewer than " + std::to_string(k) +
                                   " trials: " + offenders);
  }
  for (auto& [speaker, ids] : by_speaker) {
    Rng rng(derive_seed(seed, "folds/" + speaker));
    rng.shuffle(ids);
    const std::uint64_t start = derive_seed(seed, "fold-start/" + speaker) %
                                static_cast<std::uint64_t>(k);
    for (std::size_t j = 0; j < ids.size(); ++j) {
      folds.assignment[ids[j]] = static_cast<int>((start + j) % static_cast<std::uint64_t>(k));
    }
  }
  return folds;
}

SpeakerProfile assign_profile(std::span<const Trial* const> trials,
                              const Corpus& corpus, double tau) {
  if (trials.empty()) fail(ErrorKind::kInvalidArgument, "cannot profile a speaker with no trials");
  std::size_t over = 0, minimal = 0;
  for (const Trial* t : trials) {
    switch (classify_reference_type(corpus.scene_of(*t), t->target, t->gold)) {
      case ReferenceType::kOverspecified: ++over; break;
      case ReferenceType::kMinimal: ++minimal; break;
      case ReferenceType::kUnderspecified: break;
    }
  }
  const double n = static_cast<double>(trials.size());
  if (static_cast<double>(over) / n >= tau) return SpeakerProfile::kOverspecifier;
  if (static_cast<double>(minimal) / n >= tau) return SpeakerProfile::kMinimalist;
  return SpeakerProfile::kMixed;
}

TrialRefs build_training_set(TrainingMethod method, std::string_view focal,
                             std::span<const Trial* const> train_trials,
                             const std::map<std::string, SpeakerProfile>& profiles) {
  TrialRefs out;
  const bool present = std::any_of(train_trials.begin(), train_trials.end(),
                                   [&](const Trial* t) { return t->speaker == focal; });
  if (!present) {
    fail(ErrorKind::kProtocol, "speaker '" + std::string(focal) +
                                   "' has no trials in the training folds");
  }
  if (method == TrainingMethod::kSpeaker) {
    for (const Trial* t : train_trials) {
      if (t->speaker == focal) out.push_back(t);
    }
    return out;
  }
  auto focal_profile = profiles.find(std::string(focal));
  if (focal_profile == profiles.end()) {
    fail(ErrorKind::kProtocol, "no profile for speaker '" + std::string(focal) + "'");
  }
  for (const Trial* t : train_trials) {
    auto p = profiles.find(t->speaker);
    if (p != profiles.end() && p->second == focal_profile->second) out.push_back(t);
  }
  return out;
}

// --- Model training --------------------------------------------------------

namespace {

struct LevelData {
  Matrix x;
  std::vector<const DescriptionContent*> gold;  // content at this level
};

struct Example {
  const Scene* scene;
  std::string entity;
  const SpeakerInfo* speaker;
  const DescriptionContent* gold;
};

// Level-1 examples describe the target; level-2 examples describe the
// landmark a relational gold description refers to.
std::map<int, std::vector<Example>> level_examples(std::span<const Trial* const> trials,
                                                   const Corpus& corpus) {
  std::map<int, std::vector<Example>> out;
  for (const Trial* t : trials) {
    const Scene& scene = corpus.scene_of(*t);
    const SpeakerInfo& speaker = corpus.speaker(t->speaker);
    out[1].push_back({&scene, t->target, &speaker, &t->gold});
    if (t->gold.has_relation()) {
      auto lm = referenced_landmark(scene, t->target, t->gold);
      if (lm) out[2].push_back({&scene, *lm, &speaker, &t->gold.landmark()});
    }
  }
  return out;
}

LevelData featurize(const RegModel& model, const std::vector<Example>& examples) {
  LevelData d;
  for (const auto& e : examples) {
    d.x.push_back(describe_features(model, *e.scene, e.entity,
                                    nearest_landmark(*e.scene, e.entity), *e.speaker));
    d.gold.push_back(e.gold);
  }
  return d;
}

}  // namespace

RegModel train_model(std::span<const Trial* const> train,
                     std::span<const Trial* const> validation,
                     const Corpus& corpus, std::uint64_t seed,
                     const TrainOptions& options) {
  if (train.empty()) fail(ErrorKind::kInvalidArgument, "empty training set");
  if (validation.empty()) fail(ErrorKind::kInvalidArgument, "empty validation set");

  RegModel model;
  model.metadata.method = std::string(to_string(options.method));
  model.metadata.seed = seed;

  std::set<std::string> speakers;
  std::map<std::string, TrialRefs> by_speaker;
  for (const Trial* t : train) {
    speakers.insert(t->speaker);
    by_speaker[t->speaker].push_back(t);
  }
  model.schema = FeatureSchema(corpus.attributes(), corpus.relations(),
                               corpus.values_of(kSizeAttribute),
                               {speakers.begin(), speakers.end()},
                               options.include_speaker_ids);
  for (const auto& [id, trials] : by_speaker) {
    model.preferences[id] = compute_speaker_preferences(trials);
  }
  model.fallback_preferences = compute_speaker_preferences(train);

  auto train_examples = level_examples(train, corpus);
  auto validation_examples = level_examples(validation, corpus);

  std::map<int, LevelData> train_data, validation_data;
  Matrix all_rows;
  for (int level = 1; level <= kMaxClassifierLevel; ++level) {
    train_data[level] = featurize(model, train_examples[level]);
    validation_data[level] = featurize(model, validation_examples[level]);
    for (const auto& row : train_data[level].x) all_rows.push_back(row);
  }
  model.scaler = fit_scaler(all_rows);
  for (auto* data : {&train_data, &validation_data}) {
    for (auto& [level, d] : *data) {
      for (auto& row : d.x) row = apply_scaler(model.scaler, row);
    }
  }

  // One job per classifier; results land in fixed slots.
  struct Job {
    int level;
    std::string attribute;  // empty for the relation classifier
    std::string name;
  };
  std::vector<Job> jobs;
  for (int level = 1; level <= kMaxClassifierLevel; ++level) {
    LevelClassifiers& lc = model.levels[level];
    lc.trained = !train_data[level].x.empty();
    if (!lc.trained) continue;
    for (const auto& a : corpus.attributes()) {
      jobs.push_back({level, a, "L" + std::to_string(level) + "/" + a});
    }
    jobs.push_back({level, "", "L" + std::to_string(level) + "/relation"});
  }

  std::vector<GridRecord> records(jobs.size());
  std::vector<std::optional<BinarySvmModel>> binaries(jobs.size());
  std::vector<std::optional<MulticlassModel>> relations(jobs.size());

  parallel_for(jobs.size(), options.jobs, [&](std::size_t idx) {
    const Job& job = jobs[idx];
    const LevelData& tr = train_data.at(job.level);
    const LevelData& va_raw = validation_data.at(job.level);
    const bool fallback = va_raw.x.empty();
    const LevelData& va = fallback ? tr : va_raw;

    SvmParams base;
    base.seed = derive_seed(seed, job.name);
    GridRecord& rec = records[idx];
    rec.classifier = job.name;
    rec.train_rows = tr.x.size();
    rec.validation_rows = va_raw.x.size();
    rec.validated_on_train = fallback;

    if (!job.attribute.empty()) {
      auto labels = [&](const LevelData& d) {
        std::vector<int> y;
        for (const auto* g : d.gold) y.push_back(g->attributes.contains(job.attribute) ? 1 : -1);
        return y;
      };
      const auto ty = labels(tr), vy = labels(va);
      auto result = grid_search_binary(tr.x, ty, va.x, vy, options.grid, base);
      rec.best = result.best;
      rec.log = std::move(result.log);
      binaries[idx] = std::move(result.model);
    } else {
      auto labels = [](const LevelData& d) {
        std::vector<std::string> y;
        for (const auto* g : d.gold) {
          y.push_back(g->has_relation() ? g->relation_label() : std::string(kNoRelation));
        }
        return y;
      };
      const auto ty = labels(tr), vy = labels(va);
      auto result = grid_search_multiclass(tr.x, ty, va.x, vy, options.grid, base);
      rec.best = result.best;
      rec.log = std::move(result.log);
      relations[idx] = std::move(result.model);
    }
  });

  for (std::size_t idx = 0; idx < jobs.size(); ++idx) {
    LevelClassifiers& lc = model.levels[jobs[idx].level];
    if (binaries[idx]) lc.attributes[jobs[idx].attribute] = std::move(*binaries[idx]);
    if (relations[idx]) lc.relation = std::move(*relations[idx]);
    model.metadata.grid.push_back(std::move(records[idx]));
  }
  return model;
}

// --- Experiment driver -----------------------------------------------------

std::string corpus_checksum(const Corpus& corpus) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(save_corpus(corpus))));
  return buf;
}

namespace {

std::vector<std::string> ids_of(const TrialRefs& trials) {
  std::vector<std::string> out;
  for (const Trial* t : trials) out.push_back(t->id);
  return out;
}

TrialRefs of_speakers(const TrialRefs& trials, const std::set<std::string>& speakers) {
  TrialRefs out;
  for (const Trial* t : trials) {
    if (speakers.contains(t->speaker)) out.push_back(t);
  }
  return out;
}

constexpr std::size_t kFewTrialsWarning = 5;

}  // namespace

ExperimentRun run_experiment(const Corpus& corpus, const ExperimentOptions& options) {
  ExperimentRun run;
  run.method = options.method;
  run.k = options.k;
  run.seed = options.seed;
  run.tau = options.tau;
  run.oracle_profiles = options.oracle_profiles;
  run.corpus_checksum = corpus_checksum(corpus);
  run.folds = assign_folds(corpus, options.k, derive_seed(options.seed, "folds"),
                           options.allow_sparse);

  std::vector<TrialRefs> by_fold(static_cast<std::size_t>(options.k));
  for (const auto& t : corpus.trials()) {
    by_fold[static_cast<std::size_t>(run.folds.fold_of(t.id))].push_back(&t);
  }

  TrainOptions train_options;
  train_options.method = options.method;
  train_options.grid = options.grid;
  train_options.include_speaker_ids = options.include_speaker_ids;
  train_options.jobs = options.jobs;

  for (int i = 0; i < options.k; ++i) {
    IterationRecord it;
    it.index = i;
    it.test_fold = i;
    it.validation_fold = (i + 1) % options.k;
    TrialRefs train, validation;
    for (int f = 0; f < options.k; ++f) {
      if (f == it.test_fold || f == it.validation_fold) continue;
      it.train_folds.push_back(f);
      train.insert(train.end(), by_fold[f].begin(), by_fold[f].end());
    }
    validation = by_fold[static_cast<std::size_t>(it.validation_fold)];
    const TrialRefs& test = by_fold[static_cast<std::size_t>(it.test_fold)];
    it.test_trials = ids_of(test);

    // Profiles never see the test fold unless explicitly asked to.
    std::map<std::string, TrialRefs> profile_input;
    for (const Trial* t : train) profile_input[t->speaker].push_back(t);
    for (const Trial* t : validation) profile_input[t->speaker].push_back(t);
    if (options.oracle_profiles) {
      for (const Trial* t : test) profile_input[t->speaker].push_back(t);
    }
    for (const auto& [speaker, trials] : profile_input) {
      it.profiles[speaker] = assign_profile(trials, corpus, options.tau);
    }

    // Group test speakers by the model that will describe them.
    std::map<std::string, std::set<std::string>> groups;
    for (const Trial* t : test) {
      if (options.method == TrainingMethod::kSpeaker) {
        groups["speaker:" + t->speaker].insert(t->speaker);
      } else {
        auto p = it.profiles.find(t->speaker);
        if (p == it.profiles.end()) {
          fail(ErrorKind::kProtocol, "speaker '" + t->speaker +
                                         "' has no training data to derive a profile");
        }
        groups["profile:" + std::string(to_string(p->second))].insert(t->speaker);
      }
    }

    std::map<std::string, std::string> model_of_speaker;
    for (const auto& [name, members] : groups) {
      ModelRecord rec;
      rec.name = name;
      const std::string focal = *members.begin();
      TrialRefs model_train = build_training_set(options.method, focal, train, it.profiles);
      std::set<std::string> group_speakers;
      for (const Trial* t : model_train) group_speakers.insert(t->speaker);
      group_speakers.insert(members.begin(), members.end());
      TrialRefs model_validation = of_speakers(validation, group_speakers);
      if (model_validation.empty()) model_validation = model_train;
      if (model_train.size() < kFewTrialsWarning) {
        std::clog << "warning: iteration " << i << ", " << name << " trains on only "
                  << model_train.size() << " trials\n";
      }
      rec.speakers.assign(group_speakers.begin(), group_speakers.end());
      rec.train_trials = ids_of(model_train);
      rec.validation_trials = ids_of(model_validation);

      RegModel model = train_model(
          model_train, model_validation, corpus,
          derive_seed(options.seed, "iteration-" + std::to_string(i) + "/" + name),
          train_options);
      for (const auto& speaker : members) model_of_speaker[speaker] = name;
      for (const Trial* t : test) {
        if (!members.contains(t->speaker)) continue;
        run.predictions[t->id] = get_description(model, corpus.scene_of(*t), t->target,
                                                 corpus.speaker(t->speaker));
      }
      rec.grid = model.metadata.grid;
      if (options.keep_models) rec.model = std::move(model);
      it.models.push_back(std::move(rec));
    }
    run.iterations.push_back(std::move(it));
  }
  return run;
}

std::string save_run(const ExperimentRun& run) {
  using json_io::json;
  json doc = json::object();
  doc["version"] = 1;
  doc["method"] = std::string(to_string(run.method));
  doc["k"] = run.k;
  doc["seed"] = run.seed;
  doc["tau"] = run.tau;
  doc["oracle_profiles"] = run.oracle_profiles;
  doc["corpus_checksum"] = run.corpus_checksum;
  doc["folds"] = run.folds.assignment;
  doc["sparse_speakers"] = run.folds.sparse_speakers;
  json iterations = json::array();
  for (const auto& it : run.iterations) {
    json profiles = json::object();
    for (const auto& [s, p] : it.profiles) profiles[s] = std::string(to_string(p));
    json models = json::array();
    for (const auto& m : it.models) {
      json grid = json::array();
      for (const auto& g : m.grid) grid.push_back(json_io::grid_record_to_json(g));
      models.push_back({{"name", m.name},
                        {"speakers", m.speakers},
                        {"train_trials", m.train_trials},
                        {"validation_trials", m.validation_trials},
                        {"grid", grid}});
    }
    iterations.push_back({{"index", it.index},
                          {"test_fold", it.test_fold},
                          {"validation_fold", it.validation_fold},
                          {"train_folds", it.train_folds},
                          {"profiles", profiles},
                          {"test_trials", it.test_trials},
                          {"models", models}});
  }
  doc["iterations"] = iterations;
  json predictions = json::object();
  for (const auto& [id, c] : run.predictions) predictions[id] = json_io::content_to_json(c);
  doc["predictions"] = predictions;
  return doc.dump(1) + "\n";
}

}  // namespace reg
