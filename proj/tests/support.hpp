#pragma once

// Fixture builders and independent oracles. The oracles are written from the
// definitions, without calling the library routines they are used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reg/corpus.hpp"
#include "reg/svm.hpp"

namespace fixture {

inline reg::ObjectSpec obj(std::string id, std::map<std::string, std::string> attrs,
                           long long x = 0, long long y = 0) {
  reg::ObjectSpec o;
  o.id = std::move(id);
  o.attributes = std::move(attrs);
  o.position = {x, y};
  return o;
}

inline reg::Scene scene(std::string id, std::vector<reg::ObjectSpec> objects,
                        std::vector<reg::RelationEdge> edges = {}) {
  return reg::Scene{std::move(id), std::move(objects), std::move(edges)};
}

inline reg::DescriptionContent content(std::map<std::string, std::string> attrs) {
  reg::DescriptionContent c;
  c.attributes = std::move(attrs);
  return c;
}

inline reg::DescriptionContent content(std::map<std::string, std::string> attrs,
                                       std::string label, reg::DescriptionContent landmark) {
  reg::DescriptionContent c = content(std::move(attrs));
  c.set_relation(std::move(label), std::move(landmark));
  return c;
}

}  // namespace fixture

namespace oracle {

// One level of a description, flattened root first.
struct Level {
  std::vector<std::pair<std::string, std::string>> pairs;
  std::string relation;  // empty: no relation below this level
};

inline std::vector<Level> flatten(const reg::DescriptionContent& c) {
  std::vector<Level> out;
  const reg::DescriptionContent* cur = &c;
  while (true) {
    Level l;
    for (const auto& kv : cur->attributes) l.pairs.push_back(kv);
    if (cur->has_relation()) l.relation = cur->relation_label();
    out.push_back(l);
    if (!cur->has_relation()) break;
    cur = &cur->landmark();
  }
  return out;
}

// Bottom-up denotation: the deepest level is filtered by attributes alone,
// every level above additionally needs an edge into the set below it.
inline std::set<std::string> denotation(const reg::Scene& scene,
                                        const std::vector<Level>& levels) {
  std::set<std::string> below;
  for (std::size_t li = levels.size(); li-- > 0;) {
    const Level& l = levels[li];
    std::set<std::string> here;
    for (const auto& o : scene.objects) {
      bool ok = true;
      for (const auto& [a, v] : l.pairs) {
        auto it = o.attributes.find(a);
        if (it == o.attributes.end() || it->second != v) {
          ok = false;
          break;
        }
      }
      if (ok && !l.relation.empty()) {
        ok = false;
        for (const auto& e : scene.edges) {
          if (e.subject == o.id && e.relation == l.relation && below.count(e.object)) {
            ok = true;
            break;
          }
        }
      }
      if (ok) here.insert(o.id);
    }
    below = std::move(here);
  }
  return below;
}

// Exhaustive search over every sub-description: each atomic pair is a bit,
// each relation is a bit, and levels below a dropped relation vanish.
inline reg::ReferenceType reference_type(const reg::Scene& scene, const std::string& target,
                                         const reg::DescriptionContent& c) {
  const std::vector<Level> full = flatten(c);
  if (denotation(scene, full) != std::set<std::string>{target}) {
    return reg::ReferenceType::kUnderspecified;
  }
  struct Bit {
    std::size_t level;
    int pair;  // -1 for the relation of `level`
  };
  std::vector<Bit> bits;
  for (std::size_t l = 0; l < full.size(); ++l) {
    for (std::size_t p = 0; p < full[l].pairs.size(); ++p) bits.push_back({l, static_cast<int>(p)});
    if (!full[l].relation.empty()) bits.push_back({l, -1});
  }
  const std::uint64_t all = (std::uint64_t{1} << bits.size()) - 1;
  for (std::uint64_t mask = 0; mask < all; ++mask) {
    std::vector<Level> sub(full.size());
    for (std::size_t b = 0; b < bits.size(); ++b) {
      if (!(mask >> b & 1)) continue;
      const Bit& bit = bits[b];
      if (bit.pair < 0) {
        sub[bit.level].relation = full[bit.level].relation;
      } else {
        sub[bit.level].pairs.push_back(full[bit.level].pairs[bit.pair]);
      }
    }
    std::size_t keep = 1;
    while (keep < sub.size() && !sub[keep - 1].relation.empty()) ++keep;
    sub.resize(keep);
    if (denotation(scene, sub) == std::set<std::string>{target}) {
      return reg::ReferenceType::kOverspecified;
    }
  }
  return reg::ReferenceType::kMinimal;
}

inline double rbf(const std::vector<double>& x, const std::vector<double>& y, double gamma) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - y[i]) * (x[i] - y[i]);
  return std::exp(-gamma * d);
}

inline double decision(const reg::BinarySvmModel& m, const std::vector<double>& x) {
  double f = m.bias;
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
    f += m.coefficients[i] * rbf(m.support_vectors[i], x, m.params.gamma);
  }
  return f;
}

// Multipliers per training row, recovered by matching rows to stored support
// vectors (rows absent from the model have alpha = 0).
inline std::vector<double> alphas(const reg::BinarySvmModel& m, const reg::Matrix& x) {
  std::vector<double> a(x.size(), 0.0);
  std::vector<bool> used(m.support_vectors.size(), false);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t s = 0; s < m.support_vectors.size(); ++s) {
      if (!used[s] && m.support_vectors[s] == x[i]) {
        used[s] = true;
        a[i] = std::abs(m.coefficients[s]);
        break;
      }
    }
  }
  return a;
}

inline double max_kkt_violation(const reg::BinarySvmModel& m, const reg::Matrix& x,
                                const std::vector<int>& y) {
  const std::vector<double> a = alphas(m, x);
  const double c = m.params.C;
  const double eps = 1e-8;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double margin = y[i] * decision(m, x[i]);
    double v = 0.0;
    if (a[i] <= eps) {
      v = std::max(0.0, 1.0 - margin);
    } else if (a[i] >= c - eps) {
      v = std::max(0.0, margin - 1.0);
    } else {
      v = std::abs(margin - 1.0);
    }
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace oracle
