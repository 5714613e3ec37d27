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

// Shared fixtures for the unit and acceptance binaries.

#include <Eigen/Dense>

#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "storyloop/dataset.hpp"
#include "storyloop/text.hpp"
#include "storyloop/topics.hpp"

namespace fixtures {

using nlohmann::json;

inline json entry(const std::string& id, int ordinal, const char* character,
                  const std::string& text,
                  std::vector<std::string> cards = {},
                  const char* challenge = nullptr) {
  json e = {{"id", id},
            {"author_role", character ? "character" : "narrator"},
            {"text", text},
            {"cards_played", cards},
            {"ordinal", ordinal}};
  if (character) e["character_id"] = character;
  if (challenge) e["challenge_id"] = challenge;
  return e;
}

// Two scenes, two characters, one card of most kinds.
inline json story_json(const std::string& id = "harbor") {
  return {
      {"id", id},
      {"world", "coast"},
      {"completed", true},
      {"characters",
       {{{"id", "ana"},
         {"name", "Ana"},
         {"description", "A retired smuggler who knows every cove."},
         {"player_id", "p1"}},
        {{"id", "bo"},
         {"name", "Bo"},
         {"description", "The harbor master's anxious nephew."},
         {"player_id", "p2"}}}},
      {"cards",
       {{{"id", "storm"},
         {"kind", "challenge"},
         {"title", "The Storm"},
         {"description", "Waves break over the sea wall all night."}},
        {{"id", "rope"},
         {"kind", "item"},
         {"title", "Old Rope"},
         {"description", "Frayed but long enough."}},
        {{"id", "pier"},
         {"kind", "location"},
         {"title", "North Pier"},
         {"description", "Slick planks and broken lamps."}},
        {{"id", "brave"},
         {"kind", "strength"},
         {"title", "Brave"},
         {"description", "Does not flinch."}},
        {{"id", "wild1"}, {"kind", "goal"}, {"is_wild", true}}}},
      {"scenes",
       {{{"id", "s0"},
         {"intro", "Night falls on the harbor as the storm arrives."},
         {"entries",
          {entry("e0", 0, nullptr, "Rain hammers the shutters."),
           entry("e1", 1, "ana", "Ana grabs the old rope and runs to the pier.",
                 {"rope", "pier"}, "storm"),
           entry("e2", 2, "bo", "Bo shouts that the boats are loose!"),
           entry("e3", 3, "ana", "Ana ties the first boat to the post.",
                 {"brave"})}}},
        {{"id", "s1"},
         {"intro", "Morning. The sea is calm again."},
         {"entries",
          {entry("e4", 0, "bo", "Bo counts the boats twice."),
           entry("e5", 1, "ana", "Ana laughs and sits on the wet sand.")}}}}}};
}

inline std::vector<std::pair<std::string, std::int64_t>> lognormal_weights(
    std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::lognormal_distribution<double> dist(8.0, 1.0);
  std::vector<std::pair<std::string, std::int64_t>> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.emplace_back("story-" + std::to_string(i),
                     static_cast<std::int64_t>(std::llround(dist(rng))) + 1);
  }
  return out;
}

// Three well separated word clusters in 16 dimensions.
struct PlantedCorpus {
  storyloop::topics::Lexicon lexicon{16};
  std::vector<storyloop::TokenSequence> documents;
  std::vector<int> labels;
};

inline PlantedCorpus planted_corpus(std::uint64_t seed = 7) {
  constexpr int kDim = 16;
  constexpr int kClusters = 3;
  constexpr int kWords = 20;
  constexpr int kDocsPerCluster = 60;
  constexpr int kWordsPerDoc = 8;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  PlantedCorpus c;
  std::vector<std::vector<std::string>> words(kClusters);
  for (int k = 0; k < kClusters; ++k) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(kDim);
    // Disjoint support keeps the centres orthogonal.
    for (int j = 0; j < kDim / kClusters; ++j) center(k * (kDim / kClusters) + j) = 1.0;
    center.normalize();
    for (int w = 0; w < kWords; ++w) {
      Eigen::VectorXd v(kDim);
      for (int j = 0; j < kDim; ++j) v(j) = center(j) + 0.15 * normal(rng);
      const std::string word = "w" + std::to_string(k) + "x" + std::to_string(w);
      c.lexicon.add(word, v);
      words[k].push_back(word);
    }
  }
  std::uniform_int_distribution<int> pick(0, kWords - 1);
  for (int k = 0; k < kClusters; ++k) {
    for (int d = 0; d < kDocsPerCluster; ++d) {
      std::vector<std::string> toks;
      for (int t = 0; t < kWordsPerDoc; ++t) toks.push_back(words[k][pick(rng)]);
      c.documents.emplace_back(std::move(toks));
      c.labels.push_back(k);
    }
  }
  return c;
}

// Fraction of documents whose argmax topic equals the majority topic of
// their planted cluster.
inline double cluster_agreement(const PlantedCorpus& c, const Eigen::MatrixXd& r) {
  const int k = static_cast<int>(r.rows());
  std::vector<std::vector<int>> votes(3, std::vector<int>(k, 0));
  std::vector<int> assigned;
  for (std::size_t i = 0; i < c.documents.size(); ++i) {
    const int t = storyloop::topics::argmax_topic(
        storyloop::topics::encode_text(c.documents[i], c.lexicon), r);
    assigned.push_back(t);
    ++votes[c.labels[i]][t];
  }
  std::size_t agree = 0;
  for (std::size_t i = 0; i < c.documents.size(); ++i) {
    const auto& v = votes[c.labels[i]];
    const int majority = static_cast<int>(
        std::max_element(v.begin(), v.end()) - v.begin());
    if (assigned[i] == majority) ++agree;
  }
  return static_cast<double>(agree) / c.documents.size();
}

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("storyloop-test-" + std::to_string(::getpid()) + "-" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string str() const { return path_.string(); }

 private:
  std::filesystem::path path_;
};

}  // namespace fixtures
