#pragma once

// Stub content selectors and hand-traced get_description fixtures.

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "reg/regmodel.hpp"
#include "support.hpp"

namespace stubs {

// Lookup-table selector: per entity, the attributes and relation to choose.
class StubSelector final : public reg::ContentSelector {
 public:
  struct Choice {
    std::set<std::string> attributes;
    std::string relation = std::string(reg::kNoRelation);
  };
  struct Seen {
    std::string entity;
    std::size_t depth;
    int level;
  };

  explicit StubSelector(std::map<std::string, Choice> table) : table_(std::move(table)) {}

  std::set<std::string> attributes(const reg::SelectionQuery& q) const override {
    seen.push_back({std::string(q.entity), q.depth, q.level});
    return choice(q).attributes;
  }
  std::string relation(const reg::SelectionQuery& q) const override { return choice(q).relation; }

  mutable std::vector<Seen> seen;

 private:
  Choice choice(const reg::SelectionQuery& q) const {
    auto it = table_.find(std::string(q.entity));
    return it == table_.end() ? Choice{} : it->second;
  }
  std::map<std::string, Choice> table_;
};

// Same choice for every entity.
class UniformSelector final : public reg::ContentSelector {
 public:
  UniformSelector(std::set<std::string> attrs, std::string rel)
      : attrs_(std::move(attrs)), rel_(std::move(rel)) {}
  std::set<std::string> attributes(const reg::SelectionQuery&) const override { return attrs_; }
  std::string relation(const reg::SelectionQuery&) const override { return rel_; }

 private:
  std::set<std::string> attrs_;
  std::string rel_;
};

inline const reg::SpeakerInfo kSpeaker{"s1", reg::Gender::kFemale, 2};
inline const std::string kNone(reg::kNoRelation);

inline std::map<std::string, std::string> attrs(const char* type, const char* colour) {
  return {{"type", type}, {"colour", colour}};
}

struct Trace {
  std::string name;
  reg::Scene scene;
  std::string target;
  std::map<std::string, StubSelector::Choice> table;
  reg::DescriptionContent expected;
};

// Each expected description was traced by hand: H grows by one entity per
// level, values come from the scene, and a predicted relation follows the
// nearest landmark with that label unless it is already in H.
inline std::vector<Trace> traces() {
  using fixture::content;
  using fixture::obj;
  using fixture::scene;
  std::vector<Trace> t;
  t.push_back({"type only, no relation",
               scene("s", {obj("a", attrs("ball", "red")), obj("b", attrs("box", "red"))}), "a",
               {{"a", {{"type"}, kNone}}}, content({{"type", "ball"}})});
  t.push_back({"relation back into H is dropped",
               scene("s", {obj("a", attrs("ball", "red"), 0, 0), obj("b", attrs("box", "blue"), 1, 0)},
                     {{"a", "near", "b"}, {"b", "near", "a"}}),
               "a", {{"a", {{"type"}, "near"}}, {"b", {{"type"}, "near"}}},
               content({{"type", "ball"}}, "near", content({{"type", "box"}}))});
  t.push_back({"relation at level 1 only",
               scene("s", {obj("a", attrs("ball", "red"), 0, 0), obj("b", attrs("box", "blue"), 1, 0),
                           obj("c", attrs("cone", "red"), 2, 0)},
                     {{"a", "left_of", "b"}, {"b", "left_of", "c"}}),
               "a", {{"a", {{"colour"}, "left_of"}}, {"b", {{"type"}, kNone}}},
               content({{"colour", "red"}}, "left_of", content({{"type", "box"}}))});
  t.push_back({"three-level chain",
               scene("s", {obj("a", attrs("ball", "red"), 0, 0), obj("b", attrs("box", "blue"), 1, 0),
                           obj("c", attrs("cone", "red"), 2, 0), obj("d", attrs("ball", "blue"), 3, 0)},
                     {{"a", "left_of", "b"}, {"b", "left_of", "c"}, {"c", "left_of", "d"}}),
               "a", {{"a", {{}, "left_of"}}, {"b", {{}, "left_of"}}, {"c", {{"type"}, kNone}}},
               content({}, "left_of", content({}, "left_of", content({{"type", "cone"}})))});
  t.push_back({"label without a matching edge",
               scene("s", {obj("a", attrs("ball", "red"), 0, 0), obj("b", attrs("box", "red"), 1, 0)},
                     {{"a", "left_of", "b"}}),
               "a", {{"a", {{"type"}, "above"}}}, content({{"type", "ball"}})});
  t.push_back({"nearest landmark with the predicted label",
               scene("s", {obj("a", attrs("ball", "red"), 0, 0), obj("b", attrs("box", "red"), 1, 0),
                           obj("c", attrs("cone", "blue"), 0, 3)},
                     {{"a", "left_of", "b"}, {"a", "above", "c"}}),
               "a", {{"a", {{}, "above"}}, {"c", {{"colour"}, kNone}}},
               content({}, "above", content({{"colour", "blue"}}))});
  t.push_back({"all-negative selector",
               scene("s", {obj("a", attrs("ball", "red")), obj("b", attrs("box", "red"))}, {{"a", "near", "b"}}),
               "a", {}, reg::DescriptionContent{}});
  t.push_back({"target without edges",
               scene("s", {obj("a", attrs("ball", "red")), obj("b", attrs("box", "red"))}, {{"b", "near", "a"}}),
               "a", {{"a", {{"colour"}, "near"}}, {"b", {{"colour"}, "near"}}}, content({{"colour", "red"}})});
  t.push_back({"equidistant landmarks",
               scene("s", {obj("t", attrs("ball", "red"), 0, 0), obj("y", attrs("box", "red"), 1, 0),
                           obj("x", attrs("cone", "blue"), -1, 0)},
                     {{"t", "near", "y"}, {"t", "near", "x"}}),
               "t", {{"t", {{}, "near"}}, {"x", {{"type"}, kNone}}, {"y", {{"type"}, kNone}}},
               content({}, "near", content({{"type", "cone"}}))});
  t.push_back({"three-cycle",
               scene("s", {obj("a", attrs("ball", "red"), 0, 0), obj("b", attrs("box", "red"), 1, 0),
                           obj("c", attrs("cone", "blue"), 1, 1)},
                     {{"a", "r", "b"}, {"b", "r", "c"}, {"c", "r", "a"}}),
               "a",
               {{"a", {{"type", "colour"}, "r"}}, {"b", {{"type", "colour"}, "r"}}, {"c", {{"type", "colour"}, "r"}}},
               content(attrs("ball", "red"), "r", content(attrs("box", "red"), "r", content(attrs("cone", "blue"))))});
  return t;
}

}  // namespace stubs
