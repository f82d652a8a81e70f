#include "reg/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <list>
#include <numeric>
#include <unordered_map>

#include "reg/error.hpp"
#include "reg/random.hpp"

namespace reg {

double rbf_kernel(std::span<const double> x, std::span<const double> y,
                  double gamma) {
  if (x.size() != y.size()) {
    fail(ErrorKind::kInvalidArgument,
         "dimension mismatch: " + std::to_string(x.size()) + " vs " +
             std::to_string(y.size()));
  }
  double d2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - y[i];
    d2 += d * d;
  }
  return std::exp(-gamma * d2);
}

namespace {

constexpr std::size_t kFullGramLimit = 2000;
constexpr std::size_t kCachedRows = 256;
constexpr double kSupportThreshold = 1e-8;
constexpr double kMinStep = 1e-12;

// Kernel matrix access: precomputed up to kFullGramLimit rows, otherwise
// computed per row and kept in a small LRU cache.
class KernelMatrix {
 public:
  KernelMatrix(const Matrix& x, double gamma) : x_(x), gamma_(gamma) {
    const std::size_t n = x.size();
    if (n <= kFullGramLimit) {
      full_.assign(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        full_[i * n + i] = 1.0;
        for (std::size_t j = i + 1; j < n; ++j) {
          const double k = rbf_kernel(x[i], x[j], gamma);
          full_[i * n + j] = k;
          full_[j * n + i] = k;
        }
      }
    }
  }

  const double* row(std::size_t i) {
    const std::size_t n = x_.size();
    if (!full_.empty()) return &full_[i * n];
    if (auto it = cache_.find(i); it != cache_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first.data();
    }
    if (cache_.size() >= kCachedRows) {
      cache_.erase(lru_.back());
      lru_.pop_back();
    }
    Vector r(n);
    for (std::size_t j = 0; j < n; ++j) r[j] = rbf_kernel(x_[i], x_[j], gamma_);
    lru_.push_front(i);
    auto& slot = cache_[i];
    slot = {std::move(r), lru_.begin()};
    return slot.first.data();
  }

  double at(std::size_t i, std::size_t j) { return row(i)[j]; }

 private:
  const Matrix& x_;
  double gamma_;
  Vector full_;
  std::list<std::size_t> lru_;
  std::unordered_map<std::size_t, std::pair<Vector, std::list<std::size_t>::iterator>> cache_;
};

class SmoSolver {
 public:
  SmoSolver(const Matrix& x, std::span<const int> y, const SvmParams& p)
      : x_(x), y_(y), p_(p), kernel_(x, p.gamma), n_(x.size()),
        alpha_(n_, 0.0), error_(n_) {
    for (std::size_t i = 0; i < n_; ++i) error_[i] = -static_cast<double>(y_[i]);
    order_.resize(n_);
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    Rng rng(p.seed);
    rng.shuffle(order_);
  }

  void solve() {
    int clean_passes = 0;
    while (clean_passes < p_.max_passes) {
      if (iterations_ >= p_.max_iters) {
        hit_cap_ = true;
        break;
      }
      const int changed = sweep();
      if (hit_cap_) break;
      if (changed > 0) {
        clean_passes = 0;
        continue;
      }
      rebalance_bias();
      if (max_violation() <= p_.tol) {
        ++clean_passes;
      } else {
        clean_passes = 0;
      }
    }
  }

  BinarySvmModel model() const {
    BinarySvmModel m;
    m.params = p_;
    m.bias = bias_;
    m.dimension = x_.front().size();
    m.report.iterations = iterations_;
    m.report.hit_iteration_cap = hit_cap_;
    m.report.max_kkt_violation = max_violation();
    m.report.max_alpha = *std::max_element(alpha_.begin(), alpha_.end());
    m.report.min_alpha = *std::min_element(alpha_.begin(), alpha_.end());
    for (std::size_t i = 0; i < n_; ++i) {
      m.report.sum_alpha_y += alpha_[i] * y_[i];
      if (alpha_[i] > kSupportThreshold) {
        m.support_vectors.push_back(x_[i]);
        m.coefficients.push_back(alpha_[i] * y_[i]);
      }
    }
    return m;
  }

 private:
  // y_i * E_i = y_i f(x_i) - 1.
  double margin_gap(std::size_t i) const { return y_[i] * error_[i]; }

  double violation(std::size_t i) const {
    const double r = margin_gap(i);
    double v = 0.0;
    if (alpha_[i] < p_.C) v = std::max(v, -r);
    if (alpha_[i] > 0.0) v = std::max(v, r);
    return v;
  }

  double max_violation() const {
    double v = 0.0;
    for (std::size_t i = 0; i < n_; ++i) v = std::max(v, violation(i));
    return v;
  }

  int sweep() {
    int changed = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (violation(i) <= p_.tol) continue;
      // Seeded random second multiplier; scan the rest of the permutation
      // only if that pair cannot move.
      std::size_t j = next_partner(i);
      bool moved = step(i, j);
      for (std::size_t tries = 1; !moved && tries < n_ && !hit_cap_; ++tries) {
        moved = step(i, next_partner(i));
      }
      if (moved) ++changed;
      if (hit_cap_) break;
    }
    return changed;
  }

  std::size_t next_partner(std::size_t i) {
    std::size_t j = order_[cursor_++ % n_];
    if (j == i) j = order_[cursor_++ % n_];
    return j;
  }

  bool step(std::size_t i, std::size_t j) {
    if (iterations_ >= p_.max_iters) {
      hit_cap_ = true;
      return false;
    }
    ++iterations_;
    if (i == j) return false;
    const double yi = y_[i], yj = y_[j];
    const double ai_old = alpha_[i], aj_old = alpha_[j];
    double lo, hi;
    if (yi != yj) {
      lo = std::max(0.0, aj_old - ai_old);
      hi = std::min(p_.C, p_.C + aj_old - ai_old);
    } else {
      lo = std::max(0.0, ai_old + aj_old - p_.C);
      hi = std::min(p_.C, ai_old + aj_old);
    }
    if (hi - lo < kMinStep) return false;
    const double* ki = kernel_.row(i);
    const double kii = ki[i], kij = ki[j], kjj = kernel_.at(j, j);
    const double eta = 2.0 * kij - kii - kjj;
    if (eta >= 0.0) return false;

    double aj = aj_old - yj * (error_[i] - error_[j]) / eta;
    aj = std::clamp(aj, lo, hi);
    if (std::abs(aj - aj_old) < kMinStep) return false;
    double ai = ai_old + yi * yj * (aj_old - aj);
    // Pin values that landed on a bound within rounding.
    if (ai < kMinStep) ai = 0.0;
    if (ai > p_.C - kMinStep) ai = p_.C;

    const double dai = ai - ai_old, daj = aj - aj_old;
    const double b1 = bias_ - error_[i] - yi * dai * kii - yj * daj * kij;
    const double b2 = bias_ - error_[j] - yi * dai * kij - yj * daj * kjj;
    double b;
    if (ai > 0.0 && ai < p_.C) {
      b = b1;
    } else if (aj > 0.0 && aj < p_.C) {
      b = b2;
    } else {
      b = 0.5 * (b1 + b2);
    }
    const double db = b - bias_;
    const double* kj = kernel_.row(j);
    ki = kernel_.row(i);
    for (std::size_t k = 0; k < n_; ++k) {
      error_[k] += yi * dai * ki[k] + yj * daj * kj[k] + db;
    }
    alpha_[i] = ai;
    alpha_[j] = aj;
    bias_ = b;
    return true;
  }

  // Places the bias in the middle of the interval allowed by the KKT
  // conditions for the current multipliers (a single point when free support
  // vectors exist).
  void rebalance_bias() {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double free_sum = 0.0;
    std::size_t free_count = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const double g = error_[i] + y_[i] - bias_;  // f(x_i) without bias
      const double pin = y_[i] - g;                // bias giving y_i f = 1
      const bool up_ok = alpha_[i] < p_.C;
      const bool down_ok = alpha_[i] > 0.0;
      if (up_ok && down_ok) {
        free_sum += pin;
        ++free_count;
      }
      if (y_[i] > 0) {
        if (up_ok) lower = std::max(lower, pin);
        if (down_ok) upper = std::min(upper, pin);
      } else {
        if (up_ok) upper = std::min(upper, pin);
        if (down_ok) lower = std::max(lower, pin);
      }
    }
    double b;
    if (free_count > 0) {
      b = free_sum / static_cast<double>(free_count);
    } else if (std::isfinite(lower) && std::isfinite(upper)) {
      b = 0.5 * (lower + upper);
    } else if (std::isfinite(lower)) {
      b = lower;
    } else if (std::isfinite(upper)) {
      b = upper;
    } else {
      b = bias_;
    }
    const double db = b - bias_;
    for (auto& e : error_) e += db;
    bias_ = b;
  }

  const Matrix& x_;
  std::span<const int> y_;
  SvmParams p_;
  KernelMatrix kernel_;
  std::size_t n_;
  Vector alpha_;
  Vector error_;  // f(x_i) - y_i
  double bias_ = 0.0;
  std::vector<std::size_t> order_;
  std::size_t cursor_ = 0;
  long long iterations_ = 0;
  bool hit_cap_ = false;
};

void check_dataset(const Matrix& x, std::size_t labels) {
  if (x.empty()) fail(ErrorKind::kInvalidArgument, "cannot train on empty data");
  if (labels != x.size()) {
    fail(ErrorKind::kInvalidArgument, "label count does not match row count");
  }
  const std::size_t d = x.front().size();
  for (const auto& row : x) {
    if (row.size() != d) fail(ErrorKind::kInvalidArgument, "ragged training rows");
    for (double v : row) {
      if (std::isnan(v)) fail(ErrorKind::kInvalidArgument, "NaN feature in training data");
    }
  }
}

void check_dimension(std::size_t expected, std::size_t got) {
  if (expected != got) {
    fail(ErrorKind::kInvalidArgument,
         "dimension mismatch: model expects " + std::to_string(expected) +
             " features, got " + std::to_string(got));
  }
}

}  // namespace

BinarySvmModel train_binary(const Matrix& x, std::span<const int> y,
                            const SvmParams& params) {
  check_dataset(x, y.size());
  for (int label : y) {
    if (label != 1 && label != -1) {
      fail(ErrorKind::kInvalidArgument, "binary labels must be -1 or +1");
    }
  }
  if (!(params.C > 0.0) || !(params.gamma > 0.0)) {
    fail(ErrorKind::kInvalidArgument, "C and gamma must be positive");
  }
  if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) {
    BinarySvmModel m;
    m.params = params;
    m.dimension = x.front().size();
    m.constant_label = y.front();
    return m;
  }
  SmoSolver solver(x, y, params);
  solver.solve();
  return solver.model();
}

double decision_value(const BinarySvmModel& model, std::span<const double> x) {
  check_dimension(model.dimension, x.size());
  if (model.constant_label) return static_cast<double>(*model.constant_label);
  double f = model.bias;
  for (std::size_t i = 0; i < model.support_vectors.size(); ++i) {
    f += model.coefficients[i] *
         rbf_kernel(model.support_vectors[i], x, model.params.gamma);
  }
  return f;
}

int predict_binary(const BinarySvmModel& model, std::span<const double> x) {
  return decision_value(model, x) >= 0.0 ? 1 : -1;
}

MulticlassModel train_one_vs_one(const Matrix& x,
                                 std::span<const std::string> labels,
                                 const SvmParams& params) {
  check_dataset(x, labels.size());
  MulticlassModel m;
  m.dimension = x.front().size();
  m.classes.assign(labels.begin(), labels.end());
  std::sort(m.classes.begin(), m.classes.end());
  m.classes.erase(std::unique(m.classes.begin(), m.classes.end()), m.classes.end());

  for (std::size_t a = 0; a < m.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < m.classes.size(); ++b) {
      Matrix px;
      std::vector<int> py;
      for (std::size_t r = 0; r < x.size(); ++r) {
        if (labels[r] == m.classes[a]) {
          px.push_back(x[r]);
          py.push_back(1);
        } else if (labels[r] == m.classes[b]) {
          px.push_back(x[r]);
          py.push_back(-1);
        }
      }
      SvmParams pp = params;
      pp.seed = derive_seed(params.seed,
                            "pair:" + m.classes[a] + "|" + m.classes[b]);
      m.pairwise.emplace(std::make_pair(a, b), train_binary(px, py, pp));
    }
  }
  return m;
}

std::string predict_multiclass(const MulticlassModel& model,
                               std::span<const double> x) {
  if (model.classes.empty()) fail(ErrorKind::kInvalidArgument, "multiclass model has no classes");
  check_dimension(model.dimension, x.size());
  std::vector<int> votes(model.classes.size(), 0);
  for (const auto& [pair, binary] : model.pairwise) {
    ++votes[predict_binary(binary, x) > 0 ? pair.first : pair.second];
  }
  // max_element returns the first maximum, i.e. the smallest class index.
  auto best = std::max_element(votes.begin(), votes.end());
  return model.classes[static_cast<std::size_t>(best - votes.begin())];
}

namespace {

template <typename Model, typename Label, typename Train, typename Predict>
GridSearchResult<Model> grid_search(const Matrix& train_x,
                                    std::span<const Label> train_y,
                                    const Matrix& validation_x,
                                    std::span<const Label> validation_y,
                                    const ParamGrid& grid, const SvmParams& base,
                                    Train&& train, Predict&& predict) {
  if (validation_x.empty() || validation_x.size() != validation_y.size()) {
    fail(ErrorKind::kInvalidArgument, "grid search needs a non-empty validation set");
  }
  if (grid.C.empty() || grid.gamma.empty()) {
    fail(ErrorKind::kInvalidArgument, "empty parameter grid");
  }
  std::optional<GridSearchResult<Model>> best;
  double best_accuracy = -1.0;
  std::vector<GridPoint> log;
  for (double c : grid.C) {
    for (double g : grid.gamma) {
      SvmParams p = base;
      p.C = c;
      p.gamma = g;
      Model m = train(train_x, train_y, p);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < validation_x.size(); ++i) {
        if (predict(m, validation_x[i]) == validation_y[i]) ++hits;
      }
      const double acc =
          static_cast<double>(hits) / static_cast<double>(validation_x.size());
      log.push_back({c, g, acc});
      if (acc > best_accuracy) {
        best_accuracy = acc;
        best = GridSearchResult<Model>{p, std::move(m), {}};
      }
    }
  }
  best->log = std::move(log);
  return std::move(*best);
}

}  // namespace

GridSearchResult<BinarySvmModel> grid_search_binary(
    const Matrix& train_x, std::span<const int> train_y,
    const Matrix& validation_x, std::span<const int> validation_y,
    const ParamGrid& grid, const SvmParams& base) {
  return grid_search<BinarySvmModel, int>(
      train_x, train_y, validation_x, validation_y, grid, base,
      [](const Matrix& x, std::span<const int> y, const SvmParams& p) {
        return train_binary(x, y, p);
      },
      [](const BinarySvmModel& m, const Vector& v) { return predict_binary(m, v); });
}

GridSearchResult<MulticlassModel> grid_search_multiclass(
    const Matrix& train_x, std::span<const std::string> train_y,
    const Matrix& validation_x, std::span<const std::string> validation_y,
    const ParamGrid& grid, const SvmParams& base) {
  return grid_search<MulticlassModel, std::string>(
      train_x, train_y, validation_x, validation_y, grid, base,
      [](const Matrix& x, std::span<const std::string> y, const SvmParams& p) {
        return train_one_vs_one(x, y, p);
      },
      [](const MulticlassModel& m, const Vector& v) {
        return predict_multiclass(m, v);
      });
}

}  // namespace reg
