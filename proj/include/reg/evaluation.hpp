#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "reg/corpus.hpp"
#include "reg/training.hpp"

namespace reg {

// One element of a flattened description. Relation atoms carry the label in
// `value` and have `relation` set; `name` is then "rel".
struct Atom {
  int level = 1;
  bool relation = false;
  std::string name;
  std::string value;

  auto operator<=>(const Atom&) const = default;
};

using AtomSet = std::set<Atom>;

// Level indices follow depth, the root being level 1.
AtomSet description_atoms(const DescriptionContent& content);

// 2|a ∩ b| / (|a| + |b|); 1 when both are empty.
double dice(const AtomSet& a, const AtomSet& b);

struct TypeScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t support = 0;
  std::size_t predicted = 0;
  // No prediction of this type was made, so precision is reported as 0.
  bool never_predicted = false;
};

struct MetricsReport {
  std::size_t n = 0;
  double mean_dice = 0.0;
  double accuracy = 0.0;
  double overspec_accuracy = 0.0;
  std::map<ReferenceType, TypeScores> per_type;
  double overall_precision = 0.0;
  double overall_recall = 0.0;
  double overall_f1 = 0.0;
  // Per trial, ordered by trial id; input to significance tests.
  std::vector<std::string> trial_ids;
  std::vector<double> trial_dice;
  std::vector<bool> trial_exact;
};

// Scores predictions against the gold descriptions of every corpus trial.
// Throws ErrorKind::kInvalidArgument when a trial has no prediction.
MetricsReport evaluate_predictions(
    const std::map<std::string, DescriptionContent>& predictions,
    const Corpus& corpus);

MetricsReport evaluate_run(const ExperimentRun& run, const Corpus& corpus);

struct RankSumResult {
  double w = 0.0;  // rank sum of the first sample
  double z = 0.0;
  double p = 1.0;  // two-sided
};

// Normal approximation with average ranks for ties, tie-corrected variance and
// continuity correction.
RankSumResult wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y);

struct ChiSquareResult {
  double chi2 = 0.0;
  int df = 0;
  double p = 1.0;
};

// Upper tail P(X > x) of a chi-square variable with `df` degrees of freedom.
double chi_square_survival(double x, int df);

// Pearson test on a 2 x k table of counts. Throws ErrorKind::kInvalidArgument
// when an expected count is zero.
ChiSquareResult chi_square_2xk(const std::vector<std::vector<double>>& table);

struct Significance {
  std::optional<RankSumResult> dice_wilcoxon;
  std::optional<ChiSquareResult> accuracy_chi2;
  std::string note;  // why a test was skipped, if one was
};

Significance compare_reports(const MetricsReport& a, const MetricsReport& b);
std::string significance_json(const Significance& s, std::string_view label_a,
                              std::string_view label_b);

enum class ReportFormat { kMarkdown, kCsv };

using LabeledReports = std::vector<std::pair<std::string, MetricsReport>>;

std::string render_report(const LabeledReports& reports, ReportFormat format);

// Flat metric name -> value view of a report, as written to the CSV.
std::map<std::string, double> report_values(const MetricsReport& report);
// Inverse of the CSV rendering: label -> metric -> value.
std::map<std::string, std::map<std::string, double>> parse_report_csv(std::string_view csv);

}  // namespace reg
