#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "reg/vector.hpp"

namespace reg {

struct SvmParams {
  double C = 1.0;
  double gamma = 1.0;
  double tol = 1e-3;
  int max_passes = 10;
  long long max_iters = 100000;
  std::uint64_t seed = 0;

  bool operator==(const SvmParams&) const = default;
};

// What happened while solving the dual. Stored with the model.
struct SolverReport {
  long long iterations = 0;
  bool hit_iteration_cap = false;
  double max_kkt_violation = 0.0;
  // Over all training points, before support-vector pruning.
  double max_alpha = 0.0;
  double min_alpha = 0.0;
  double sum_alpha_y = 0.0;

  bool operator==(const SolverReport&) const = default;
};

struct BinarySvmModel {
  Matrix support_vectors;
  Vector coefficients;  // alpha_i * y_i
  double bias = 0.0;
  SvmParams params;
  std::size_t dimension = 0;
  // Set when training saw a single class; the model then always predicts it.
  std::optional<int> constant_label;
  SolverReport report;

  bool operator==(const BinarySvmModel&) const = default;
};

// exp(-gamma * |x - y|^2). Throws ErrorKind::kInvalidArgument on a size mismatch.
double rbf_kernel(std::span<const double> x, std::span<const double> y, double gamma);

// Simplified SMO over the full Gram matrix (or a row cache above 2000 rows).
// Labels must be -1 or +1.
BinarySvmModel train_binary(const Matrix& x, std::span<const int> y,
                            const SvmParams& params);

double decision_value(const BinarySvmModel& model, std::span<const double> x);
// Sign of the decision value, with sign(0) = +1.
int predict_binary(const BinarySvmModel& model, std::span<const double> x);

struct MulticlassModel {
  std::vector<std::string> classes;  // sorted
  // Key (i, j) with i < j; +1 votes for classes[i], -1 for classes[j].
  std::map<std::pair<std::size_t, std::size_t>, BinarySvmModel> pairwise;
  std::size_t dimension = 0;

  bool operator==(const MulticlassModel&) const = default;
};

MulticlassModel train_one_vs_one(const Matrix& x,
                                 std::span<const std::string> labels,
                                 const SvmParams& params);

// Majority vote over pairwise models; ties go to the smallest class index.
std::string predict_multiclass(const MulticlassModel& model,
                               std::span<const double> x);

struct ParamGrid {
  std::vector<double> C{1, 10, 100, 1000};
  std::vector<double> gamma{1, 0.1, 0.01, 0.001};
};

struct GridPoint {
  double C = 0.0;
  double gamma = 0.0;
  double accuracy = 0.0;

  bool operator==(const GridPoint&) const = default;
};

template <typename Model>
struct GridSearchResult {
  SvmParams best;
  Model model;
  std::vector<GridPoint> log;
};

// Trains every (C, gamma) on `train`, scores accuracy on `validation` and keeps
// the first best in grid order (C outer, gamma inner). The returned model is
// the one fitted on `train` alone with the winning parameters.
GridSearchResult<BinarySvmModel> grid_search_binary(
    const Matrix& train_x, std::span<const int> train_y,
    const Matrix& validation_x, std::span<const int> validation_y,
    const ParamGrid& grid, const SvmParams& base);

GridSearchResult<MulticlassModel> grid_search_multiclass(
    const Matrix& train_x, std::span<const std::string> train_y,
    const Matrix& validation_x, std::span<const std::string> validation_y,
    const ParamGrid& grid, const SvmParams& base);

}  // namespace reg
