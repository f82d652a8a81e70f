#include <cmath>
#include <vector>

#include "doctest.h"
#include "reg/error.hpp"
#include "reg/features.hpp"
#include "reg/random.hpp"
#include "support.hpp"

using fixture::content;
using fixture::obj;

namespace {

reg::FeatureSchema schema() {
  return reg::FeatureSchema({"colour", "size", "type"}, {"left_of", "on_top_of"},
                            {"large", "small"}, {"s1", "s2"});
}

reg::Trial trial(std::string id, reg::DescriptionContent gold) {
  reg::Trial t;
  t.id = std::move(id);
  t.gold = std::move(gold);
  return t;
}

}  // namespace

TEST_SUITE("features") {

TEST_CASE("schema order: blocks fixed, names sorted inside each block") {
  const auto s = schema();
  const std::vector<std::string> expected{
      "lm_size",         "rel_is_left_of",   "rel_is_on_top_of", "shares_lm_colour",
      "shares_lm_size",  "shares_lm_type",   "shares_tg_colour", "shares_tg_size",
      "shares_tg_type",  "tg_size",          "spk_is_s1",        "spk_is_s2",
      "gender_is_female", "gender_is_male",  "age_bracket",      "pref_tg_colour",
      "pref_tg_size",    "pref_tg_type",     "pref_lm_colour",   "pref_lm_size",
      "pref_lm_type"};
  CHECK(s.names() == expected);
  CHECK(reg::FeatureSchema({"type", "size", "colour"}, {"on_top_of", "left_of"},
                           {"small", "large"}, {"s2", "s1"}) == s);
  const reg::FeatureSchema no_ids({"colour"}, {}, {}, {"s1"}, false);
  CHECK_FALSE(no_ids.index_of("spk_is_s1"));
}

TEST_CASE("speaker preferences") {
  SUBCASE("constant usage") {
    std::vector<reg::Trial> ts;
    for (int i = 0; i < 4; ++i) ts.push_back(trial("t" + std::to_string(i), content({{"colour", "red"}})));
    std::vector<const reg::Trial*> refs;
    for (const auto& t : ts) refs.push_back(&t);
    CHECK(reg::compute_speaker_preferences(refs).target_freq.at("colour") == 1.0);
  }
  SUBCASE("single use") {
    std::vector<reg::Trial> ts{trial("a", content({{"size", "small"}})), trial("b", content({})),
                               trial("c", content({})), trial("d", content({}))};
    std::vector<const reg::Trial*> refs;
    for (const auto& t : ts) refs.push_back(&t);
    CHECK(reg::compute_speaker_preferences(refs).target_freq.at("size") == 0.25);
  }
  SUBCASE("landmark frequency is over trials with a landmark level") {
    std::vector<reg::Trial> ts{
        trial("a", content({}, "left_of", content({{"type", "box"}}))),
        trial("b", content({}, "left_of", content({{"colour", "red"}}))),
        trial("c", content({{"type", "ball"}}))};
    std::vector<const reg::Trial*> refs;
    for (const auto& t : ts) refs.push_back(&t);
    const auto p = reg::compute_speaker_preferences(refs);
    CHECK(p.landmark_freq.at("type") == 0.5);
    CHECK(p.landmark_trials == 2);
  }
  SUBCASE("no trials") {
    const auto p = reg::compute_speaker_preferences({});
    CHECK(p.empty());
    CHECK(p.target_freq.empty());
  }
}

TEST_CASE("context features") {
  const auto s = schema();
  SUBCASE("nothing shared, no landmark") {
    const auto sc = fixture::scene(
        "s", {obj("a", {{"colour", "red"}, {"size", "small"}, {"type", "ball"}}),
              obj("b", {{"colour", "blue"}, {"size", "large"}, {"type", "box"}})});
    const auto f = reg::extract_context_features(s, sc, "a", std::nullopt);
    for (const char* a : {"colour", "size", "type"}) {
      CHECK(f.at(std::string("shares_tg_") + a) == 0.0);
      CHECK(f.at(std::string("shares_lm_") + a) == 0.0);
    }
    CHECK(f.at("rel_is_left_of") == 0.0);
    CHECK(f.at("rel_is_on_top_of") == 0.0);
    CHECK(f.at("tg_size") == 2.0);  // "small" is second of {large, small}
    CHECK(f.at("lm_size") == 0.0);
  }
  SUBCASE("both distractors share the target colour") {
    const auto sc = fixture::scene(
        "s", {obj("a", {{"colour", "red"}, {"size", "small"}, {"type", "ball"}}),
              obj("b", {{"colour", "red"}, {"size", "large"}, {"type", "box"}}),
              obj("c", {{"colour", "red"}, {"size", "large"}, {"type", "cone"}})});
    CHECK(reg::extract_context_features(s, sc, "a", std::nullopt).at("shares_tg_colour") == 2.0);
  }
  SUBCASE("landmark on top") {
    const auto sc = fixture::scene(
        "s", {obj("a", {{"colour", "red"}, {"size", "small"}, {"type", "ball"}}),
              obj("b", {{"colour", "blue"}, {"size", "large"}, {"type", "box"}}),
              obj("c", {{"colour", "blue"}, {"size", "large"}, {"type", "box"}}),
              obj("d", {{"colour", "red"}, {"size", "small"}, {"type", "box"}})},
        {{"a", "on_top_of", "b"}});
    const auto f = reg::extract_context_features(s, sc, "a", reg::LandmarkRef{"b", "on_top_of"});
    CHECK(f.at("rel_is_on_top_of") == 1.0);
    CHECK(f.at("rel_is_left_of") == 0.0);
    CHECK(f.at("lm_size") == 1.0);
    // Hand count for landmark b over {a, c, d}.
    CHECK(f.at("shares_lm_colour") == 1.0);
    CHECK(f.at("shares_lm_size") == 1.0);
    CHECK(f.at("shares_lm_type") == 2.0);
    CHECK(f.at("shares_tg_type") == 0.0);
    CHECK(f.at("shares_tg_colour") == 1.0);
  }
}

TEST_CASE("speaker features") {
  const auto s = schema();
  reg::SpeakerPreferences prefs;
  prefs.target_freq = {{"colour", 0.75}, {"size", 0.25}};
  reg::SpeakerInfo spk{"s2", reg::Gender::kMale, 3};
  auto f = reg::extract_speaker_features(spk, prefs, s);
  CHECK(f.at("spk_is_s1") == 0.0);
  CHECK(f.at("spk_is_s2") == 1.0);
  CHECK(f.at("gender_is_male") == 1.0);
  CHECK(f.at("gender_is_female") == 0.0);
  CHECK(f.at("age_bracket") == 3.0);
  CHECK(f.at("pref_tg_colour") == 0.75);
  CHECK(f.at("pref_tg_size") == 0.25);
  CHECK(f.at("pref_tg_type") == 0.0);

  f = reg::extract_speaker_features({"s9", reg::Gender::kUnspecified, 0}, prefs, s);
  CHECK(f.at("spk_is_s1") == 0.0);
  CHECK(f.at("spk_is_s2") == 0.0);
  CHECK(f.at("gender_is_male") == 0.0);
  CHECK(f.at("gender_is_female") == 0.0);
}

TEST_CASE("encode") {
  const auto s = schema();
  CHECK(reg::encode({}, s) == reg::Vector(s.dimension(), 0.0));
  const auto v = reg::encode({{"tg_size", 2.0}, {"pref_lm_type", 0.5}}, s);
  CHECK(v[*s.index_of("tg_size")] == 2.0);
  CHECK(v.back() == 0.5);
  try {
    reg::encode({{"mystery", 1.0}}, s);
    FAIL("schema drift accepted");
  } catch (const reg::Error& e) {
    CHECK(e.kind() == reg::ErrorKind::kInvalidArgument);
  }
}

TEST_CASE("a one-count change in sharing moves exactly one coordinate") {
  const auto s = schema();
  auto sc = fixture::scene(
      "s", {obj("a", {{"colour", "red"}, {"size", "small"}, {"type", "ball"}}),
            obj("b", {{"colour", "blue"}, {"size", "large"}, {"type", "box"}})});
  const auto before = reg::encode(reg::extract_context_features(s, sc, "a", std::nullopt), s);
  sc.objects[1].attributes["colour"] = "red";
  const auto after = reg::encode(reg::extract_context_features(s, sc, "a", std::nullopt), s);
  int changed = 0;
  for (std::size_t i = 0; i < before.size(); ++i) changed += before[i] != after[i];
  CHECK(changed == 1);
  CHECK(after[*s.index_of("shares_tg_colour")] - before[*s.index_of("shares_tg_colour")] == 1.0);
}

TEST_CASE("scaler") {
  SUBCASE("two points") {
    const auto sc = reg::fit_scaler({{0.0}, {2.0}});
    CHECK(sc.mean[0] == 1.0);
    CHECK(sc.stddev[0] == 1.0);
    CHECK(reg::apply_scaler(sc, {2.0})[0] == 1.0);
  }
  SUBCASE("constant column scales to zero") {
    const auto sc = reg::fit_scaler({{3.0, 1.0}, {3.0, 2.0}});
    CHECK(sc.stddev[0] == 1.0);
    CHECK(reg::apply_scaler(sc, {3.0, 1.0})[0] == 0.0);
  }
  SUBCASE("random matrices standardize") {
    reg::Rng rng(3);
    for (int round = 0; round < 20; ++round) {
      reg::Matrix m(5, reg::Vector(3));
      for (auto& r : m) {
        for (auto& x : r) x = rng.uniform() * 10.0 - 5.0;
      }
      const auto sc = reg::fit_scaler(m);
      for (std::size_t j = 0; j < 3; ++j) {
        double mean = 0.0, sq = 0.0;
        for (const auto& r : m) mean += reg::apply_scaler(sc, r)[j];
        mean /= 5.0;
        for (const auto& r : m) sq += std::pow(reg::apply_scaler(sc, r)[j] - mean, 2);
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::sqrt(sq / 5.0) == doctest::Approx(1.0));
      }
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(reg::fit_scaler({}), reg::Error);
    CHECK_THROWS_AS(reg::apply_scaler(reg::fit_scaler({{1.0}}), {1.0, 2.0}), reg::Error);
  }
}

}  // TEST_SUITE
