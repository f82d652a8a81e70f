#include "reg/evaluation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>

#include "json_io.hpp"
#include "reg/error.hpp"

namespace reg {

namespace {

void flatten(const DescriptionContent& c, int level, AtomSet& out) {
  for (const auto& [name, value] : c.attributes) out.insert({level, false, name, value});
  if (c.has_relation()) {
    out.insert({level, true, "rel", c.relation_label()});
    flatten(c.landmark(), level + 1, out);
  }
}

}  // namespace

AtomSet description_atoms(const DescriptionContent& content) {
  AtomSet out;
  flatten(content, 1, out);
  return out;
}

double dice(const AtomSet& a, const AtomSet& b) {
  if (a.empty() && b.empty()) return 1.0;
  std::size_t common = 0;
  for (const auto& x : a) common += b.count(x);
  return 2.0 * static_cast<double>(common) / static_cast<double>(a.size() + b.size());
}

MetricsReport evaluate_predictions(
    const std::map<std::string, DescriptionContent>& predictions,
    const Corpus& corpus) {
  std::vector<const Trial*> trials;
  for (const auto& t : corpus.trials()) trials.push_back(&t);
  std::sort(trials.begin(), trials.end(),
            [](const Trial* a, const Trial* b) { return a->id < b->id; });

  MetricsReport r;
  std::map<ReferenceType, std::size_t> tp, predicted, support;
  std::size_t exact = 0, type_match = 0;
  double dice_sum = 0.0;
  for (const Trial* t : trials) {
    auto it = predictions.find(t->id);
    if (it == predictions.end()) {
      fail(ErrorKind::kInvalidArgument, "no prediction for trial '" + t->id + "'");
    }
    const Scene& scene = corpus.scene_of(*t);
    const AtomSet pred = description_atoms(it->second);
    const AtomSet gold = description_atoms(t->gold);
    const double d = dice(pred, gold);
    const bool match = pred == gold;
    const ReferenceType gold_type = classify_reference_type(scene, t->target, t->gold);
    const ReferenceType pred_type = classify_reference_type(scene, t->target, it->second);

    dice_sum += d;
    exact += match ? 1 : 0;
    type_match += gold_type == pred_type ? 1 : 0;
    ++support[gold_type];
    ++predicted[pred_type];
    if (gold_type == pred_type) ++tp[gold_type];
    r.trial_ids.push_back(t->id);
    r.trial_dice.push_back(d);
    r.trial_exact.push_back(match);
  }
  r.n = trials.size();
  if (r.n == 0) return r;
  const double n = static_cast<double>(r.n);
  r.mean_dice = dice_sum / n;
  r.accuracy = static_cast<double>(exact) / n;
  r.overspec_accuracy = static_cast<double>(type_match) / n;

  for (ReferenceType type : kAllReferenceTypes) {
    TypeScores s;
    s.support = support[type];
    s.predicted = predicted[type];
    s.never_predicted = s.predicted == 0;
    const double hits = static_cast<double>(tp[type]);
    s.precision = s.predicted ? hits / static_cast<double>(s.predicted) : 0.0;
    s.recall = s.support ? hits / static_cast<double>(s.support) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    const double w = static_cast<double>(s.support) / n;
    r.overall_precision += w * s.precision;
    r.overall_recall += w * s.recall;
    r.overall_f1 += w * s.f1;
    r.per_type[type] = s;
  }
  return r;
}

MetricsReport evaluate_run(const ExperimentRun& run, const Corpus& corpus) {
  return evaluate_predictions(run.predictions, corpus);
}

// --- Significance ----------------------------------------------------------

RankSumResult wilcoxon_rank_sum(std::span<const double> x, std::span<const double> y) {
  if (x.empty() || y.empty()) {
    fail(ErrorKind::kInvalidArgument, "rank-sum test needs two non-empty samples");
  }
  const std::size_t n1 = x.size(), n2 = y.size(), total = n1 + n2;
  std::vector<std::pair<double, bool>> pooled;  // value, from x
  pooled.reserve(total);
  for (double v : x) pooled.emplace_back(v, true);
  for (double v : y) pooled.emplace_back(v, false);
  std::sort(pooled.begin(), pooled.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  double w = 0.0, tie_term = 0.0;
  for (std::size_t i = 0; i < total;) {
    std::size_t j = i;
    while (j < total && pooled[j].first == pooled[i].first) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of i+1..j
    const double t = static_cast<double>(j - i);
    tie_term += t * t * t - t;
    for (std::size_t k = i; k < j; ++k) {
      if (pooled[k].second) w += rank;
    }
    i = j;
  }
  const double a = static_cast<double>(n1), b = static_cast<double>(n2),
               n = static_cast<double>(total);
  const double mean = a * (n + 1.0) / 2.0;
  const double var = a * b / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
  RankSumResult r;
  r.w = w;
  if (!(var > 0.0)) return r;  // every value tied
  const double diff = std::abs(w - mean);
  r.z = std::max(0.0, diff - 0.5) / std::sqrt(var);
  if (w < mean) r.z = -r.z;
  r.p = std::erfc(std::abs(r.z) / std::sqrt(2.0));
  return r;
}

namespace {

// Regularized upper incomplete gamma Q(a, x): power series for P when
// x < a + 1, Lentz continued fraction for Q otherwise.
double regularized_gamma_q(double a, double x) {
  if (x <= 0.0) return 1.0;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 10000;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a, sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::abs(term) < std::abs(sum) * kEps) break;
    }
    return std::max(0.0, 1.0 - sum * std::exp(log_prefix));
  }
  constexpr double kTiny = std::numeric_limits<double>::min() / kEps;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefix) * h;
}

}  // namespace

double chi_square_survival(double x, int df) {
  if (df < 1) fail(ErrorKind::kInvalidArgument, "chi-square needs df >= 1");
  return regularized_gamma_q(0.5 * df, 0.5 * x);
}

ChiSquareResult chi_square_2xk(const std::vector<std::vector<double>>& table) {
  if (table.size() != 2 || table[0].size() != table[1].size() || table[0].size() < 2) {
    fail(ErrorKind::kInvalidArgument, "chi-square needs a 2 x k table with k >= 2");
  }
  const std::size_t k = table[0].size();
  double rows[2] = {0.0, 0.0};
  std::vector<double> cols(k, 0.0);
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      if (table[r][c] < 0.0) fail(ErrorKind::kInvalidArgument, "negative count");
      rows[r] += table[r][c];
      cols[c] += table[r][c];
    }
  }
  const double total = rows[0] + rows[1];
  ChiSquareResult out;
  out.df = static_cast<int>(k) - 1;
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      const double expected = total > 0.0 ? rows[r] * cols[c] / total : 0.0;
      if (!(expected > 0.0)) {
        fail(ErrorKind::kInvalidArgument, "chi-square: zero expected count");
      }
      const double d = table[r][c] - expected;
      out.chi2 += d * d / expected;
    }
  }
  out.p = chi_square_survival(out.chi2, out.df);
  return out;
}

Significance compare_reports(const MetricsReport& a, const MetricsReport& b) {
  Significance s;
  if (a.trial_dice.empty() || b.trial_dice.empty()) {
    s.note = "no trials to compare";
    return s;
  }
  s.dice_wilcoxon = wilcoxon_rank_sum(a.trial_dice, b.trial_dice);
  auto hits = [](const MetricsReport& r) {
    return static_cast<double>(std::count(r.trial_exact.begin(), r.trial_exact.end(), true));
  };
  const std::vector<std::vector<double>> table{
      {hits(a), static_cast<double>(a.n) - hits(a)},
      {hits(b), static_cast<double>(b.n) - hits(b)}};
  try {
    s.accuracy_chi2 = chi_square_2xk(table);
  } catch (const Error& e) {
    s.note = std::string("accuracy chi-square skipped: ") + e.what();
  }
  return s;
}

std::string significance_json(const Significance& s, std::string_view label_a,
                              std::string_view label_b) {
  using json_io::json;
  json doc = json::object();
  doc["compared"] = {std::string(label_a), std::string(label_b)};
  if (s.dice_wilcoxon) {
    doc["dice_wilcoxon"] = {{"W", s.dice_wilcoxon->w},
                            {"z", s.dice_wilcoxon->z},
                            {"p", s.dice_wilcoxon->p},
                            {"alternative", "two-sided"}};
  } else {
    doc["dice_wilcoxon"] = nullptr;
  }
  if (s.accuracy_chi2) {
    doc["accuracy_chi2"] = {{"chi2", s.accuracy_chi2->chi2},
                            {"df", s.accuracy_chi2->df},
                            {"p", s.accuracy_chi2->p}};
  } else {
    doc["accuracy_chi2"] = nullptr;
  }
  if (!s.note.empty()) doc["note"] = s.note;
  return doc.dump(1) + "\n";
}

// --- Reports ---------------------------------------------------------------

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string exact(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string_view type_heading(ReferenceType t) {
  switch (t) {
    case ReferenceType::kMinimal: return "Minimal.";
    case ReferenceType::kOverspecified: return "Oversp.";
    case ReferenceType::kUnderspecified: return "Undersp.";
  }
  return "?";
}

std::string render_markdown(const LabeledReports& reports) {
  std::ostringstream out;
  out << "## Content selection results\n\n| Method | Dice | Acc. |\n|---|---|---|\n";
  for (const auto& [label, r] : reports) {
    out << "| " << label << " | " << fixed2(r.mean_dice) << " | " << fixed2(r.accuracy)
        << " |\n";
  }
  out << "\n## Referential overspecification accuracy\n\n| Method | Overall |\n|---|---|\n";
  for (const auto& [label, r] : reports) {
    out << "| " << label << " | " << fixed2(r.overspec_accuracy) << " |\n";
  }
  out << "\n## Reference type classification results\n\n| Reference type | support |";
  for (const auto& [label, r] : reports) out << " " << label << " P | " << label
                                             << " R | " << label << " F |";
  out << "\n|---|---|";
  for (std::size_t i = 0; i < reports.size(); ++i) out << "---|---|---|";
  out << "\n";
  const MetricsReport& first = reports.front().second;
  for (ReferenceType t : kAllReferenceTypes) {
    out << "| " << type_heading(t) << " | " << first.per_type.at(t).support << " |";
    for (const auto& [label, r] : reports) {
      const TypeScores& s = r.per_type.at(t);
      out << " " << fixed2(s.precision) << (s.never_predicted ? "*" : "") << " | "
          << fixed2(s.recall) << " | " << fixed2(s.f1) << " |";
    }
    out << "\n";
  }
  out << "| Overall | " << first.n << " |";
  for (const auto& [label, r] : reports) {
    out << " " << fixed2(r.overall_precision) << " | " << fixed2(r.overall_recall)
        << " | " << fixed2(r.overall_f1) << " |";
  }
  out << "\n\n";
  bool flagged = false;
  for (const auto& [label, r] : reports) {
    for (const auto& [t, s] : r.per_type) flagged = flagged || s.never_predicted;
  }
  if (flagged) out << "\\* type never predicted; precision reported as 0.\n\n";
  out << "Dice and exact match are computed over (level, attribute, value) atoms,"
         " relation atoms included.\n";
  return out.str();
}

}  // namespace

std::map<std::string, double> report_values(const MetricsReport& r) {
  std::map<std::string, double> v;
  v["n"] = static_cast<double>(r.n);
  v["mean_dice"] = r.mean_dice;
  v["accuracy"] = r.accuracy;
  v["overspec_accuracy"] = r.overspec_accuracy;
  for (const auto& [t, s] : r.per_type) {
    const std::string p(to_string(t));
    v[p + "_precision"] = s.precision;
    v[p + "_recall"] = s.recall;
    v[p + "_f1"] = s.f1;
    v[p + "_support"] = static_cast<double>(s.support);
  }
  v["overall_precision"] = r.overall_precision;
  v["overall_recall"] = r.overall_recall;
  v["overall_f1"] = r.overall_f1;
  return v;
}

std::string render_report(const LabeledReports& reports, ReportFormat format) {
  if (reports.empty()) fail(ErrorKind::kInvalidArgument, "no reports to render");
  if (format == ReportFormat::kMarkdown) return render_markdown(reports);
  std::string out = "label,metric,value\n";
  for (const auto& [label, r] : reports) {
    if (label.find_first_of(",\n\"") != std::string::npos) {
      fail(ErrorKind::kInvalidArgument, "report label '" + label + "' is not CSV-safe");
    }
    for (const auto& [metric, value] : report_values(r)) {
      out += label + "," + metric + "," + exact(value) + "\n";
    }
  }
  return out;
}

std::map<std::string, std::map<std::string, double>> parse_report_csv(std::string_view csv) {
  std::map<std::string, std::map<std::string, double>> out;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != "label,metric,value") {
    fail(ErrorKind::kParse, "report CSV: bad header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      fail(ErrorKind::kParse, "report CSV: bad line '" + line + "'");
    }
    double value = 0.0;
    const char* begin = line.data() + c2 + 1;
    const char* end = line.data() + line.size();
    auto res = std::from_chars(begin, end, value);
    if (res.ec != std::errc() || res.ptr != end) {
      fail(ErrorKind::kParse, "report CSV: bad value in '" + line + "'");
    }
    out[line.substr(0, c1)][line.substr(c1 + 1, c2 - c1 - 1)] = value;
  }
  return out;
}

}  // namespace reg
