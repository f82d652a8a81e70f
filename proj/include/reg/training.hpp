#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "reg/corpus.hpp"
#include "reg/profile.hpp"
#include "reg/regmodel.hpp"
#include "reg/svm.hpp"

namespace reg {

enum class TrainingMethod { kSpeaker, kProfile };

std::string_view to_string(TrainingMethod method);
// Throws ErrorKind::kInvalidArgument on an unknown name.
TrainingMethod parse_method(std::string_view name);

using TrialRefs = std::vector<const Trial*>;

struct FoldAssignment {
  int k = 0;
  std::map<std::string, int> assignment;  // trial id -> fold
  // Speakers with fewer than k trials, admitted by the sparse override.
  std::vector<std::string> sparse_speakers;

  int fold_of(std::string_view trial_id) const;
};

// Per speaker: seeded shuffle, then round-robin dealing from a seeded start
// fold. Throws ErrorKind::kProtocol when k < 3 or, without `allow_sparse`,
// when a speaker has fewer than k trials.
FoldAssignment assign_folds(const Corpus& corpus, int k, std::uint64_t seed,
                            bool allow_sparse = false);

// Overspecifier iff the overspecified fraction reaches tau, minimalist iff the
// minimal fraction does, mixed otherwise.
SpeakerProfile assign_profile(std::span<const Trial* const> trials,
                              const Corpus& corpus, double tau = 1.0);

// Speaker: the focal speaker's trials. Profile: the trials of every speaker
// sharing the focal speaker's profile.
TrialRefs build_training_set(TrainingMethod method, std::string_view focal,
                             std::span<const Trial* const> train_trials,
                             const std::map<std::string, SpeakerProfile>& profiles);

struct TrainOptions {
  TrainingMethod method = TrainingMethod::kSpeaker;
  ParamGrid grid;
  bool include_speaker_ids = true;
  unsigned jobs = 1;
};

// Builds schema, preferences and scaler from `train` only, then grid-searches
// every classifier (per level: one binary per attribute plus the relation
// classifier) against `validation`.
RegModel train_model(std::span<const Trial* const> train,
                     std::span<const Trial* const> validation,
                     const Corpus& corpus, std::uint64_t seed,
                     const TrainOptions& options = {});

struct ExperimentOptions {
  TrainingMethod method = TrainingMethod::kSpeaker;
  int k = 6;
  std::uint64_t seed = 42;
  double tau = 1.0;
  // Profiles from every trial, test fold included.
  bool oracle_profiles = false;
  bool allow_sparse = false;
  ParamGrid grid;
  bool include_speaker_ids = true;
  bool keep_models = false;
  unsigned jobs = 1;
};

struct ModelRecord {
  std::string name;  // "speaker:<id>" or "profile:<profile>"
  std::vector<std::string> speakers;
  std::vector<std::string> train_trials;
  std::vector<std::string> validation_trials;
  std::vector<GridRecord> grid;
  std::optional<RegModel> model;  // kept only with keep_models
};

struct IterationRecord {
  int index = 0;
  int test_fold = 0;
  int validation_fold = 0;
  std::vector<int> train_folds;
  std::map<std::string, SpeakerProfile> profiles;
  std::vector<std::string> test_trials;
  std::vector<ModelRecord> models;
};

struct ExperimentRun {
  TrainingMethod method = TrainingMethod::kSpeaker;
  int k = 0;
  std::uint64_t seed = 0;
  double tau = 1.0;
  bool oracle_profiles = false;
  std::string corpus_checksum;
  FoldAssignment folds;
  std::vector<IterationRecord> iterations;
  std::map<std::string, DescriptionContent> predictions;
};

// Stable hex digest of the canonical corpus document.
std::string corpus_checksum(const Corpus& corpus);

ExperimentRun run_experiment(const Corpus& corpus, const ExperimentOptions& options);

// Canonical JSON run record (models are not embedded).
std::string save_run(const ExperimentRun& run);

}  // namespace reg
