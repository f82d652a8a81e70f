#include <map>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "reg/error.hpp"
#include "reg/regmodel.hpp"
#include "stubs.hpp"
#include "support.hpp"

using fixture::content;
using fixture::obj;
using stubs::attrs;
using stubs::kSpeaker;
using stubs::StubSelector;
using stubs::UniformSelector;

TEST_SUITE("regmodel") {

TEST_CASE("hand-traced fixtures") {
  for (const auto& t : stubs::traces()) {
    CAPTURE(t.name);
    const StubSelector sel(t.table);
    CHECK(reg::get_description(sel, t.scene, t.target, kSpeaker) == t.expected);
  }
}

TEST_CASE("deeper levels reuse the level-2 classifiers") {
  const auto traces = stubs::traces();
  const auto& t = traces.at(3);
  const StubSelector sel(t.table);
  reg::get_description(sel, t.scene, t.target, kSpeaker);
  REQUIRE(sel.seen.size() == 3);
  CHECK(sel.seen[0].entity == "a");
  CHECK(sel.seen[0].level == 1);
  CHECK(sel.seen[1].level == 2);
  CHECK(sel.seen[2].entity == "c");
  CHECK(sel.seen[2].depth == 3);
  CHECK(sel.seen[2].level == 2);
}

TEST_CASE("values are read from the scene, never invented") {
  const auto s = fixture::scene("s", {obj("a", attrs("ball", "green")), obj("b", attrs("box", "red"))});
  const UniformSelector sel({"type", "colour"}, stubs::kNone);
  const auto d = reg::get_description(sel, s, "a", kSpeaker);
  CHECK(d.attributes == attrs("ball", "green"));
}

TEST_CASE("chains give one level per object; complete graphs terminate") {
  for (int n = 2; n <= 8; ++n) {
    std::vector<reg::ObjectSpec> objects;
    std::vector<reg::RelationEdge> chain, complete;
    for (int i = 0; i < n; ++i) objects.push_back(obj("o" + std::to_string(i), attrs("ball", "red"), i, i % 3));
    for (int i = 0; i < n; ++i) {
      if (i + 1 < n) chain.push_back({"o" + std::to_string(i), "r", "o" + std::to_string(i + 1)});
      for (int j = 0; j < n; ++j) {
        if (i != j) complete.push_back({"o" + std::to_string(i), "r", "o" + std::to_string(j)});
      }
    }
    const UniformSelector always({"type"}, "r");
    CHECK(reg::get_description(always, fixture::scene("s", objects, chain), "o0", kSpeaker).depth() ==
          static_cast<std::size_t>(n));
    // o0's nearest is o1, whose nearest is o0 again: the guard stops at two.
    const auto d = reg::get_description(always, fixture::scene("s", objects, complete), "o0", kSpeaker);
    CHECK(d.depth() == 2);
  }
}

TEST_CASE("model selector on untrained levels selects nothing") {
  reg::RegModel model;
  const auto s = fixture::scene("s", {obj("a", attrs("ball", "red")), obj("b", attrs("box", "red"))});
  const auto d = reg::get_description(model, s, "a", kSpeaker);
  CHECK(d.empty());
  CHECK_THROWS_AS(reg::predict_attributes(model, 1, {}), reg::Error);
  CHECK_THROWS_AS(reg::predict_relation(model, 2, {}), reg::Error);
}

}  // TEST_SUITE
