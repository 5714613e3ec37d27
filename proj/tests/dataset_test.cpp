// Copyright 2026 The Storyloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "storyloop/dataset.hpp"
#include "storyloop/error.hpp"

using namespace storyloop;
using namespace storyloop::dataset;
using fixtures::json;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::kInternal;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

// A story whose single scene holds `n` character entries.
json story_with_entries(const std::string& id, int n) {
  json s = fixtures::story_json(id);
  json entries = json::array();
  for (int i = 0; i < n; ++i) {
    entries.push_back(fixtures::entry("e" + std::to_string(i), i, "ana",
                                      "word " + std::to_string(i)));
  }
  s["scenes"] = json::array({{{"id", "only"}, {"intro", ""}, {"entries", entries}}});
  return s;
}

}  // namespace

TEST_SUITE("dataset") {
  TEST_CASE("story round trip") {
    const Story s = load_story(fixtures::story_json());
    CHECK(s.scenes.size() == 2);
    CHECK(s.scenes[0].entries[1].cards_played.size() == 2);
    CHECK(s.scenes[0].entries[0].is_narrator());
    const json canonical = to_json(s);
    CHECK(to_json(load_story(canonical)) == canonical);
  }

  TEST_CASE("entries are ordered by ordinal") {
    json doc = fixtures::story_json();
    auto& entries = doc["scenes"][1]["entries"];
    std::swap(entries[0], entries[1]);
    const Story s = load_story(doc);
    CHECK(s.scenes[1].entries[0].id == "e4");
  }

  TEST_CASE("schema violations name the field") {
    json doc = fixtures::story_json();
    doc["scenes"][0]["entries"][2]["mood"] = "tense";
    CHECK(code_of([&] { load_story(doc); }) == ErrorCode::kSchemaViolation);
    CHECK(message_of([&] { load_story(doc); }).rfind("scenes[0].entries[2]", 0) == 0);

    doc = fixtures::story_json();
    doc["scenes"][0]["entries"][2]["text"] = 5;
    CHECK(message_of([&] { load_story(doc); }).rfind("scenes[0].entries[2].text", 0) == 0);

    doc = fixtures::story_json();
    doc["scenes"][0]["entries"][3]["ordinal"] = 7;
    CHECK(code_of([&] { load_story(doc); }) == ErrorCode::kSchemaViolation);

    doc = fixtures::story_json();
    doc["cards"][1]["kind"] = "spell";
    CHECK(code_of([&] { load_story(doc); }) == ErrorCode::kSchemaViolation);

    doc = fixtures::story_json();
    doc["characters"][1]["id"] = "ana";
    CHECK(code_of([&] { load_story(doc); }) == ErrorCode::kSchemaViolation);
  }

  TEST_CASE("dangling references") {
    json doc = fixtures::story_json();
    doc["scenes"][0]["entries"][2]["character_id"] = "ghost";
    CHECK(code_of([&] { load_story(doc); }) == ErrorCode::kDanglingReference);
    doc = fixtures::story_json();
    doc["scenes"][0]["entries"][3]["cards_played"] = {"nothing"};
    CHECK(code_of([&] { load_story(doc); }) == ErrorCode::kDanglingReference);
  }

  TEST_CASE("corpus loading") {
    fixtures::TempDir dir;
    std::filesystem::create_directories(dir.path() / "stories");
    for (const char* id : {"b", "a"}) {
      std::ofstream(dir.path() / "stories" / (std::string(id) + ".story"))
          << fixtures::story_json(id).dump();
    }
    const auto corpus = load_corpus(dir.str());
    REQUIRE(corpus.size() == 2);
    CHECK(corpus[0].id == "a");
  }

  TEST_CASE("summary statistics") {
    const FeatureStats f = summarize("x", {3, 5});
    CHECK(f.mean == 4.0);
    CHECK(f.std_dev == 1.0);
    CHECK(f.total == 8.0);

    const auto stats = compute_stats({load_story(story_with_entries("p", 3)),
                                      load_story(story_with_entries("q", 5))});
    CHECK(stats.stories == 2);
    CHECK(stats.feature("entries_per_story").mean == 4.0);
    CHECK(stats.feature("entries_per_story").std_dev == 1.0);
    CHECK(stats.feature("characters_per_story").mean == 2.0);
    CHECK_THROWS_AS(compute_stats({}), Error);
  }

  TEST_CASE("histograms") {
    const Histogram h = make_histogram("x", {0, 1, 2, 5}, 2);
    CHECK(h.bin_width == 2);
    CHECK(h.bins == std::vector<std::int64_t>{2, 1, 1});
    const Histogram fd = make_histogram("x", {1, 2, 3, 4, 5, 6, 7, 8}, std::nullopt);
    CHECK(fd.bin_width >= 1);
    std::int64_t n = 0;
    for (auto b : fd.bins) n += b;
    CHECK(n == 8);
  }

  TEST_CASE("split of equal stories") {
    std::vector<std::pair<std::string, std::int64_t>> w;
    for (int i = 0; i < 10; ++i) w.emplace_back("s" + std::to_string(i), 100);
    const auto a = split_weights(w, SplitRatios{}, 1);
    CHECK(a.stories == std::array<std::size_t, 3>{8, 1, 1});
    CHECK(a.tokens == std::array<std::int64_t, 3>{800, 100, 100});
  }

  TEST_CASE("split of three stories") {
    const auto a = split_weights({{"x", 5}, {"y", 7}, {"z", 9}}, SplitRatios{}, 1);
    CHECK(a.stories == std::array<std::size_t, 3>{1, 1, 1});
    CHECK(code_of([] { split_weights({{"x", 5}, {"y", 7}}, SplitRatios{}, 1); }) ==
          ErrorCode::kTooFewStories);
  }

  TEST_CASE("split of lognormal stories balances tokens") {
    for (std::uint64_t seed : {1u, 2u, 3u, 42u}) {
      const auto w = fixtures::lognormal_weights(100, seed);
      const auto a = split_weights(w, SplitRatios{}, seed);
      CHECK(a.stories == std::array<std::size_t, 3>{80, 10, 10});
      CHECK(std::abs(a.token_ratio[0] - 0.8) <= 0.01);
      CHECK(std::abs(a.token_ratio[1] - 0.1) <= 0.01);
      CHECK(std::abs(a.token_ratio[2] - 0.1) <= 0.01);
      CHECK(to_json(split_weights(w, SplitRatios{}, seed)) == to_json(a));
    }
  }

  TEST_CASE("split ratios parsing") {
    CHECK(SplitRatios::parse("3:1:1").weights == std::array<int, 3>{3, 1, 1});
    CHECK_THROWS_AS(SplitRatios::parse("8:1"), Error);
    CHECK_THROWS_AS(SplitRatios::parse("8:0:1"), Error);
  }

  TEST_CASE("generation example for a character entry") {
    const Story s = load_story(fixtures::story_json());
    // Ana's second entry: Bo spoke last, so Ana's earlier entry is included.
    const auto ex = build_generation_example(s, 0, 3);
    std::vector<std::string> names;
    for (const auto& seg : ex.segments) names.push_back(seg.spec.name);
    CHECK(names == std::vector<std::string>{"intro", "challenge_title",
                                            "challenge_description",
                                            "card_title:brave",
                                            "card_description:brave", "character",
                                            "prev_entry", "last_entry"});
    CHECK(ex.reference == s.scenes[0].entries[3].text);
    CHECK(ex.segments[1].spec.available == 0);
    CHECK(ex.segments[6].tokens.front() == "Bo");
    CHECK(ex.segments[7].tokens.front() == "Ana");
    CHECK(ex.segments[6].spec.trim == packing::Trim::kTail);
    const auto& vocab = segment_vocabulary();
    CHECK(ex.segments[3].spec.segment_ids ==
          std::vector<packing::SegmentId>{vocab.id("strength-card"), vocab.id("title")});
  }

  TEST_CASE("generation example excludes location cards and crosses scenes") {
    const Story s = load_story(fixtures::story_json());
    const auto first = build_generation_example(s, 0, 1);
    for (const auto& seg : first.segments) CHECK(seg.spec.name != "card_title:pier");
    CHECK(first.segments[1].tokens.size() == 2);  // "The Storm"
    CHECK(first.segments.back().spec.available == 0);

    // Bo opens scene 1; the previous entry is Ana's from scene 0, and Bo's
    // own last entry is found further back.
    const auto opener = build_generation_example(s, 1, 0);
    CHECK(opener.segments[opener.segments.size() - 2].tokens.front() == "Ana");
    CHECK(opener.segments.back().tokens.front() == "Bo");
  }

  TEST_CASE("generation example errors") {
    const Story s = load_story(fixtures::story_json());
    CHECK(code_of([&] { build_generation_example(s, 0, 0); }) == ErrorCode::kNarratorTarget);
    CHECK(code_of([&] { build_generation_example(s, 5, 0); }) == ErrorCode::kIndexOutOfRange);
    CHECK(code_of([&] { build_generation_example(s, 0, 9); }) == ErrorCode::kIndexOutOfRange);
  }

  TEST_CASE("generation example packs under the default policy") {
    const Story s = load_story(fixtures::story_json());
    const auto ex = build_generation_example(s, 0, 3);
    packing::Vocabulary tokens;
    const auto inputs = to_pack_inputs(ex.segments, tokens);
    std::vector<packing::SegmentSpec> specs;
    std::int64_t available = 0;
    for (const auto& in : inputs) {
      specs.push_back(in.spec);
      available += in.spec.available;
    }
    const auto& policy = packing::default_policy();
    const auto alloc = packing::solve(specs, policy.instantiate(specs),
                                      policy.effective_budget());
    CHECK(alloc.total() == available);
  }
}
