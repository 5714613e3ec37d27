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

#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "storyloop/packing.hpp"

namespace storyloop::dataset {

enum class CardKind { kStrength, kWeakness, kItem, kGoal, kLocation, kChallenge };

std::string_view card_kind_name(CardKind kind);
std::optional<CardKind> parse_card_kind(std::string_view name);
inline constexpr CardKind kAllCardKinds[] = {
    CardKind::kStrength, CardKind::kWeakness, CardKind::kItem,
    CardKind::kGoal,     CardKind::kLocation, CardKind::kChallenge};

struct Card {
  std::string id;
  CardKind kind = CardKind::kStrength;
  bool is_wild = false;
  std::string title;
  std::string description;
};

struct Character {
  std::string id;
  std::string name;
  std::string description;
  std::string player_id;
};

struct Entry {
  std::string id;
  // Empty for narrator entries.
  std::optional<std::string> character_id;
  std::string text;
  std::vector<std::string> cards_played;
  std::optional<std::string> challenge_id;
  int ordinal = 0;

  bool is_narrator() const { return !character_id.has_value(); }
};

struct Scene {
  std::string id;
  std::string intro;
  std::vector<Entry> entries;
};

struct Story {
  std::string id;
  std::optional<std::string> world;
  bool completed = false;
  std::vector<Character> characters;
  std::vector<Card> cards;
  std::vector<Scene> scenes;

  const Card* find_card(const std::string& id) const;
  const Character* find_character(const std::string& id) const;
};

// ---- ingestion ---------------------------------------------------------

// Validates a story document. Throws kSchemaViolation (message starts with
// the offending field path, e.g. "scenes[0].entries[2].text") or
// kDanglingReference. Entries are reordered by ordinal; ordinals must then
// run 0..n-1 in each scene.
Story load_story(const nlohmann::json& document);
Story load_story_file(const std::string& path);

// Canonical document: fixed key order, defaults written out.
nlohmann::json to_json(const Story& story);

// Loads every `stories/<id>.story` file (or `<dir>/<id>.story` when `dir`
// has no `stories` subdirectory), sorted by file name.
std::vector<Story> load_corpus(const std::string& dir);

// Number of STATS tokens in a text; the unit for budgets and statistics.
std::int64_t stats_token_count(std::string_view text);

// ---- statistics ----------------------------------------------------------

struct FeatureStats {
  std::string feature;
  std::size_t count = 0;  // number of samples
  double total = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;  // population
};

struct Histogram {
  std::string feature;
  std::int64_t bin_width = 1;
  std::vector<std::int64_t> bins;  // bins[k] counts samples in [k*w, (k+1)*w)
};

struct DatasetStats {
  std::size_t stories = 0;
  std::size_t unique_tokens = 0;  // distinct STATS tokens over the corpus
  std::vector<FeatureStats> features;
  std::vector<Histogram> histograms;

  const FeatureStats& feature(const std::string& name) const;
  const Histogram& histogram(const std::string& name) const;
};

struct StatsOptions {
  // Fixed bin width for every histogram; otherwise Freedman-Diaconis,
  // rounded up to an integer >= 1.
  std::optional<std::int64_t> bin_width;
};

// Throws kEmptyCorpus.
DatasetStats compute_stats(const std::vector<Story>& corpus,
                           const StatsOptions& options = {});

FeatureStats summarize(const std::string& feature,
                       const std::vector<double>& samples);
Histogram make_histogram(const std::string& feature,
                         const std::vector<double>& samples,
                         std::optional<std::int64_t> bin_width);

nlohmann::json to_json(const DatasetStats& stats);
std::string format_table(const DatasetStats& stats);

// ---- splits --------------------------------------------------------------

enum class Split { kTrain, kValid, kTest };
std::string_view split_name(Split split);

struct SplitAssignment {
  std::map<std::string, Split> assignment;
  std::array<std::size_t, 3> stories{};
  std::array<std::int64_t, 3> tokens{};
  std::array<double, 3> story_ratio{};
  std::array<double, 3> token_ratio{};
};

struct SplitRatios {
  std::array<int, 3> weights{8, 1, 1};
  static SplitRatios parse(std::string_view text);  // "8:1:1"
};

// Per-story weight is the STATS token count of all entry text.
std::int64_t story_tokens(const Story& story);

// Balanced split on story count and token count. Story quotas follow the
// ratios exactly (largest remainder, each split getting at least one story).
// Stories are placed largest first into the split with the largest token
// deficit per remaining slot, preferring splits the story does not overflow;
// pairwise swaps then reduce the remaining token imbalance. The seed only
// orders stories of equal token count. Throws kTooFewStories below 3.
SplitAssignment split_corpus(const std::vector<Story>& corpus,
                             const SplitRatios& ratios, std::uint64_t seed);

// Same algorithm on bare (id, tokens) pairs.
SplitAssignment split_weights(
    const std::vector<std::pair<std::string, std::int64_t>>& weights,
    const SplitRatios& ratios, std::uint64_t seed);

nlohmann::json to_json(const SplitAssignment& split);

// ---- generation examples -----------------------------------------------

// Names of the segment vocabulary used by generation bundles.
const packing::Vocabulary& segment_vocabulary();

struct BundleSegment {
  packing::SegmentSpec spec;
  std::vector<std::string> tokens;  // STATS tokens of the source text
};

struct GenerationExample {
  std::vector<BundleSegment> segments;
  std::string reference;  // the target entry text
  std::string character_id;
};

// Context for generating entry `entry_index` of scene `scene_index`, in
// order: scene intro, challenge card (title, description), played cards
// (title, description each; location cards excluded), character biography,
// the immediately preceding story entry and, when that entry was written by
// someone else, the target character's own most recent entry. Absent
// context keeps its segment with available == 0.
//
// Throws kIndexOutOfRange or kNarratorTarget.
GenerationExample build_generation_example(const Story& story,
                                           std::size_t scene_index,
                                           std::size_t entry_index);

std::vector<packing::PackInput> to_pack_inputs(
    const std::vector<BundleSegment>& segments, packing::Vocabulary& tokens);

}  // namespace storyloop::dataset
