#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "reg/error.hpp"
#include "reg/random.hpp"
#include "reg/svm.hpp"
#include "support.hpp"

namespace {

reg::SvmParams params(double c, double gamma, std::uint64_t seed = 1) {
  reg::SvmParams p;
  p.C = c;
  p.gamma = gamma;
  p.seed = seed;
  return p;
}

const reg::Matrix kXor{{0, 0}, {1, 1}, {0, 1}, {1, 0}};
const std::vector<int> kXorY{-1, -1, 1, 1};

reg::BinarySvmModel constant(int label, std::size_t dim) {
  reg::BinarySvmModel m;
  m.constant_label = label;
  m.dimension = dim;
  return m;
}

}  // namespace

TEST_SUITE("svm") {

TEST_CASE("rbf kernel values") {
  const std::vector<double> o{0, 0}, e{1, 0}, a{1, 2}, b{3, 1};
  CHECK(reg::rbf_kernel(a, a, 0.5) == 1.0);
  CHECK(reg::rbf_kernel(o, e, 1.0) == doctest::Approx(0.36788).epsilon(1e-5));
  CHECK(reg::rbf_kernel(a, b, 0.1) == doctest::Approx(0.60653).epsilon(1e-5));
  CHECK_THROWS_AS(reg::rbf_kernel(a, std::vector<double>{1.0}, 1.0), reg::Error);
}

TEST_CASE("rbf kernel properties on random vectors") {
  reg::Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> x(4), y(4);
    for (auto& v : x) v = rng.uniform() * 4 - 2;
    for (auto& v : y) v = rng.uniform() * 4 - 2;
    const double g = 0.01 + rng.uniform();
    CHECK(reg::rbf_kernel(x, x, g) == 1.0);
    CHECK(reg::rbf_kernel(x, y, g) == reg::rbf_kernel(y, x, g));
    CHECK(reg::rbf_kernel(x, y, g) > 0.0);
    CHECK(reg::rbf_kernel(x, y, g) <= 1.0);
  }
}

TEST_CASE("single-class input gives a constant model") {
  const auto m = reg::train_binary({{0.0}, {1.0}, {5.0}}, std::vector<int>{1, 1, 1}, params(1, 1));
  CHECK(m.constant_label == 1);
  CHECK(m.support_vectors.empty());
  CHECK(reg::predict_binary(m, std::vector<double>{-100.0}) == 1);
}

TEST_CASE("two-point closed form") {
  // Symmetric dual: alpha1 = alpha2 = 1 / (1 - K12), b = 0, f(x1) = -1, f(x2) = +1.
  const auto m = reg::train_binary({{0.0}, {2.0}}, std::vector<int>{-1, 1}, params(1000, 1));
  const double k12 = std::exp(-4.0);
  const double alpha = 1.0 / (1.0 - k12);
  auto closed = [&](double x) {
    return alpha * (std::exp(-(x - 2) * (x - 2)) - std::exp(-x * x));
  };
  for (double x : {-1.0, 0.0, 0.5, 1.0, 1.7, 2.0, 3.0}) {
    CHECK(std::abs(reg::decision_value(m, std::vector<double>{x}) - closed(x)) < 1e-4);
  }
  CHECK(std::abs(m.bias) < 1e-4);
  CHECK(reg::decision_value(m, std::vector<double>{0.0}) < 0.0);
  CHECK(reg::decision_value(m, std::vector<double>{2.0}) > 0.0);
  CHECK(reg::predict_binary(m, std::vector<double>{0.0}) == -1);
}

TEST_CASE("XOR is learned exactly") {
  const auto m = reg::train_binary(kXor, kXorY, params(1000, 1));
  for (std::size_t i = 0; i < kXor.size(); ++i) {
    CHECK(reg::predict_binary(m, kXor[i]) == kXorY[i]);
  }
  for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
    const double f = reg::decision_value(m, m.support_vectors[s]);
    CHECK((f > 0) == (m.coefficients[s] > 0));
  }
}

TEST_CASE("sign(0) is +1") {
  reg::BinarySvmModel m;
  m.dimension = 1;
  m.bias = 0.0;
  CHECK(reg::decision_value(m, std::vector<double>{3.0}) == 0.0);
  CHECK(reg::predict_binary(m, std::vector<double>{3.0}) == 1);
}

TEST_CASE("dual feasibility and KKT on random datasets") {
  reg::Rng rng(123);
  const double cs[] = {1, 10, 100, 1000};
  const double gs[] = {1, 0.1, 0.01, 0.001};
  for (int round = 0; round < 100; ++round) {
    const std::size_t n = 2 + rng.below(49);
    const std::size_t d = 1 + rng.below(6);
    reg::Matrix x(n, reg::Vector(d));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : x[i]) v = rng.uniform() * 4 - 2;
      y[i] = rng.bernoulli(0.5) ? 1 : -1;
    }
    y[0] = 1;
    y[1] = -1;
    const auto p = params(cs[rng.below(4)], gs[rng.below(4)], round);
    const auto m = reg::train_binary(x, y, p);
    const double c = p.C;
    double sum = 0.0;
    for (double coef : m.coefficients) {
      CHECK(std::abs(coef) <= c + 1e-8);
      CHECK(std::abs(coef) > 1e-8);
      sum += coef;
    }
    CHECK(std::abs(sum) <= 1e-6);
    CHECK(m.report.min_alpha >= 0.0);
    CHECK(m.report.max_alpha <= c + 1e-8);
    CHECK(std::abs(m.report.sum_alpha_y) <= 1e-6);
    if (!m.report.hit_iteration_cap) {
      CHECK(oracle::max_kkt_violation(m, x, y) <= p.tol + 1e-9);
    }
    for (const auto& row : x) {
      CHECK(reg::decision_value(m, row) == doctest::Approx(oracle::decision(m, row)));
    }
  }
}

TEST_CASE("separable clusters are fit exactly") {
  reg::Rng rng(5);
  for (int round = 0; round < 20; ++round) {
    const std::size_t d = 1 + rng.below(5);
    const std::size_t n = 10 + rng.below(41);
    reg::Matrix x(n, reg::Vector(d));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = i % 2 ? 1 : -1;
      for (auto& v : x[i]) v = y[i] * 2.5 + (rng.uniform() - 0.5) * 0.5;
    }
    const auto m = reg::train_binary(x, y, params(1000, 1.0 / d, round));
    for (std::size_t i = 0; i < n; ++i) CHECK(reg::predict_binary(m, x[i]) == y[i]);
  }
}

TEST_CASE("training is deterministic in its inputs") {
  reg::Rng rng(9);
  reg::Matrix x(30, reg::Vector(3));
  std::vector<int> y(30);
  for (std::size_t i = 0; i < 30; ++i) {
    for (auto& v : x[i]) v = rng.uniform();
    y[i] = rng.bernoulli(0.5) ? 1 : -1;
  }
  CHECK(reg::train_binary(x, y, params(10, 1, 4)) == reg::train_binary(x, y, params(10, 1, 4)));
}

TEST_CASE("invalid training input") {
  CHECK_THROWS_AS(reg::train_binary({}, std::vector<int>{}, params(1, 1)), reg::Error);
  CHECK_THROWS_AS(reg::train_binary({{1.0}, {2.0, 3.0}}, std::vector<int>{1, -1}, params(1, 1)), reg::Error);
  CHECK_THROWS_AS(reg::train_binary({{NAN}, {1.0}}, std::vector<int>{1, -1}, params(1, 1)), reg::Error);
  CHECK_THROWS_AS(reg::train_binary({{0.0}, {1.0}}, std::vector<int>{1, 0}, params(1, 1)), reg::Error);
  CHECK_THROWS_AS(reg::train_binary({{0.0}, {1.0}}, std::vector<int>{1, -1}, params(0, 1)), reg::Error);
  const auto m = reg::train_binary(kXor, kXorY, params(1000, 1));
  CHECK_THROWS_AS(reg::decision_value(m, std::vector<double>{1.0}), reg::Error);
}

TEST_CASE("one-vs-one multiclass") {
  SUBCASE("single class") {
    const std::vector<std::string> labels{"a", "a"};
    const auto m = reg::train_one_vs_one({{0.0}, {1.0}}, labels, params(1, 1));
    CHECK(m.pairwise.empty());
    CHECK(reg::predict_multiclass(m, std::vector<double>{7.0}) == "a");
  }
  SUBCASE("three separated clusters") {
    reg::Matrix x;
    std::vector<std::string> labels;
    const double centres[3][2] = {{0, 0}, {5, 0}, {0, 5}};
    const char* names[3] = {"c", "a", "b"};
    reg::Rng rng(2);
    for (int k = 0; k < 3; ++k) {
      for (int i = 0; i < 6; ++i) {
        x.push_back({centres[k][0] + rng.uniform() - 0.5, centres[k][1] + rng.uniform() - 0.5});
        labels.push_back(names[k]);
      }
    }
    const auto m = reg::train_one_vs_one(x, labels, params(100, 0.5));
    CHECK(m.classes == std::vector<std::string>{"a", "b", "c"});
    CHECK(m.pairwise.size() == 3);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(reg::predict_multiclass(m, x[i]) == labels[i]);
  }
  SUBCASE("a cyclic three-way tie goes to the first class") {
    reg::MulticlassModel m;
    m.classes = {"a", "b", "c"};
    m.dimension = 1;
    m.pairwise[{0, 1}] = constant(1, 1);   // a
    m.pairwise[{1, 2}] = constant(1, 1);   // b
    m.pairwise[{0, 2}] = constant(-1, 1);  // c
    CHECK(reg::predict_multiclass(m, std::vector<double>{0.0}) == "a");
  }
  SUBCASE("empty data") {
    CHECK_THROWS_AS(reg::train_one_vs_one({}, std::vector<std::string>{}, params(1, 1)), reg::Error);
  }
}

TEST_CASE("grid search") {
  const reg::ParamGrid grid;
  SUBCASE("XOR as train and validation") {
    const auto r = reg::grid_search_binary(kXor, kXorY, kXor, kXorY, grid, params(1, 1));
    CHECK(r.log.size() == 16);
    double best = 0.0;
    for (const auto& pt : r.log) best = std::max(best, pt.accuracy);
    CHECK(best == 1.0);
    for (std::size_t i = 0; i < kXor.size(); ++i) CHECK(reg::predict_binary(r.model, kXor[i]) == kXorY[i]);
    // Selected combination is the first in grid order reaching the best score.
    for (const auto& pt : r.log) {
      if (pt.accuracy == best) {
        CHECK(pt.C == r.best.C);
        CHECK(pt.gamma == r.best.gamma);
        break;
      }
    }
  }
  SUBCASE("all combinations equal selects C=1, gamma=1") {
    const reg::Matrix x{{0.0}, {1.0}};
    const std::vector<int> y{1, 1};
    const auto r = reg::grid_search_binary(x, y, x, y, grid, params(1, 1));
    CHECK(r.best.C == 1.0);
    CHECK(r.best.gamma == 1.0);
  }
  SUBCASE("grid order is C outer, gamma inner") {
    const auto r = reg::grid_search_binary(kXor, kXorY, kXor, kXorY, grid, params(1, 1));
    CHECK(r.log[0].C == 1);
    CHECK(r.log[0].gamma == 1);
    CHECK(r.log[1].C == 1);
    CHECK(r.log[1].gamma == 0.1);
    CHECK(r.log[4].C == 10);
  }
  SUBCASE("multiclass") {
    const reg::Matrix x{{0.0}, {0.1}, {3.0}, {3.1}};
    const std::vector<std::string> y{"no-relation", "no-relation", "left_of", "left_of"};
    const auto r = reg::grid_search_multiclass(x, y, x, y, grid, params(1, 1));
    CHECK(r.log.size() == 16);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(reg::predict_multiclass(r.model, x[i]) == y[i]);
  }
}

}  // TEST_SUITE
