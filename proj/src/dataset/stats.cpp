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

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>
#include <sstream>
#include <unordered_set>

#include "storyloop/dataset.hpp"
#include "storyloop/error.hpp"
#include "storyloop/text.hpp"

namespace storyloop::dataset {
namespace {

// Linear interpolation between closest ranks on sorted data.
double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::int64_t freedman_diaconis(const std::vector<double>& samples) {
  if (samples.size() < 2) return 1;
  std::vector<double> sorted = samples;
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
  const double w = 2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(w)));
}

}  // namespace

FeatureStats summarize(const std::string& feature,
                       const std::vector<double>& samples) {
  FeatureStats f;
  f.feature = feature;
  f.count = samples.size();
  for (double v : samples) f.total += v;
  if (samples.empty()) return f;
  f.mean = f.total / static_cast<double>(samples.size());
  double ss = 0.0;
  for (double v : samples) ss += (v - f.mean) * (v - f.mean);
  f.std_dev = std::sqrt(ss / static_cast<double>(samples.size()));
  return f;
}

Histogram make_histogram(const std::string& feature,
                         const std::vector<double>& samples,
                         std::optional<std::int64_t> bin_width) {
  Histogram h;
  h.feature = feature;
  if (bin_width && *bin_width < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bin width must be >= 1");
  }
  h.bin_width = bin_width ? *bin_width : freedman_diaconis(samples);
  for (double v : samples) {
    const auto k = static_cast<std::size_t>(
        std::max(0.0, std::floor(v / static_cast<double>(h.bin_width))));
    if (h.bins.size() <= k) h.bins.resize(k + 1, 0);
    ++h.bins[k];
  }
  return h;
}

const FeatureStats& DatasetStats::feature(const std::string& name) const {
  for (const FeatureStats& f : features) {
    if (f.feature == name) return f;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown feature " + name);
}

const Histogram& DatasetStats::histogram(const std::string& name) const {
  for (const Histogram& h : histograms) {
    if (h.feature == name) return h;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown feature " + name);
}

DatasetStats compute_stats(const std::vector<Story>& corpus,
                           const StatsOptions& options) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "empty corpus");

  // Feature order is the table order.
  std::vector<std::pair<std::string, std::vector<double>>> samples;
  auto slot = [&](const std::string& name) -> std::vector<double>& {
    for (auto& [n, v] : samples) {
      if (n == name) return v;
    }
    samples.emplace_back(name, std::vector<double>{});
    return samples.back().second;
  };
  slot("scenes_per_story");
  slot("entries_per_story");
  slot("entries_per_scene");
  slot("characters_per_story");
  slot("cards_per_story");
  slot("played_cards_per_entry");
  for (CardKind k : kAllCardKinds) {
    slot("played_cards_per_entry." + std::string(card_kind_name(k)));
  }
  slot("tokens_per_entry");
  slot("tokens_per_character_description");
  for (CardKind k : kAllCardKinds) {
    slot("tokens_per_card." + std::string(card_kind_name(k)));
  }

  std::unordered_set<std::string> vocabulary;
  auto count_tokens = [&](std::string_view text) {
    TokenSequence seq = tokenize(text, TokenizerMode::kStats);
    for (std::string& t : seq.tokens) vocabulary.insert(std::move(t));
    return static_cast<double>(seq.size());
  };

  for (const Story& story : corpus) {
    std::size_t entries = 0;
    slot("scenes_per_story").push_back(static_cast<double>(story.scenes.size()));
    slot("characters_per_story")
        .push_back(static_cast<double>(story.characters.size()));
    slot("cards_per_story").push_back(static_cast<double>(story.cards.size()));
    for (const Character& c : story.characters) {
      slot("tokens_per_character_description")
          .push_back(count_tokens(c.description));
    }
    for (const Card& c : story.cards) {
      slot("tokens_per_card." + std::string(card_kind_name(c.kind)))
          .push_back(count_tokens(c.title) + count_tokens(c.description));
    }
    for (const Scene& scene : story.scenes) {
      entries += scene.entries.size();
      slot("entries_per_scene")
          .push_back(static_cast<double>(scene.entries.size()));
      count_tokens(scene.intro);
      for (const Entry& e : scene.entries) {
        slot("tokens_per_entry").push_back(count_tokens(e.text));
        slot("played_cards_per_entry")
            .push_back(static_cast<double>(e.cards_played.size()));
        for (CardKind k : kAllCardKinds) {
          double n = 0;
          for (const std::string& id : e.cards_played) {
            if (story.find_card(id)->kind == k) ++n;
          }
          slot("played_cards_per_entry." + std::string(card_kind_name(k)))
              .push_back(n);
        }
      }
    }
    slot("entries_per_story").push_back(static_cast<double>(entries));
  }

  DatasetStats stats;
  stats.stories = corpus.size();
  stats.unique_tokens = vocabulary.size();
  for (const auto& [name, values] : samples) {
    stats.features.push_back(summarize(name, values));
    stats.histograms.push_back(make_histogram(name, values, options.bin_width));
  }
  return stats;
}

nlohmann::json to_json(const DatasetStats& stats) {
  nlohmann::json doc;
  doc["stories"] = stats.stories;
  doc["unique_tokens"] = stats.unique_tokens;
  doc["features"] = nlohmann::json::array();
  for (const FeatureStats& f : stats.features) {
    doc["features"].push_back({{"feature", f.feature},
                               {"count", f.count},
                               {"total", f.total},
                               {"mean", f.mean},
                               {"std_dev", f.std_dev}});
  }
  doc["histograms"] = nlohmann::json::array();
  for (const Histogram& h : stats.histograms) {
    doc["histograms"].push_back(
        {{"feature", h.feature}, {"bin_width", h.bin_width}, {"bins", h.bins}});
  }
  return doc;
}

std::string format_table(const DatasetStats& stats) {
  std::size_t width = 7;
  for (const FeatureStats& f : stats.features) {
    width = std::max(width, f.feature.size());
  }
  std::ostringstream out;
  out << std::fixed << std::setprecision(6);
  out << std::left << std::setw(static_cast<int>(width)) << "feature"
      << std::right << std::setw(10) << "count" << std::setw(18) << "total"
      << std::setw(16) << "mean" << std::setw(16) << "std_dev" << "\n";
  for (const FeatureStats& f : stats.features) {
    out << std::left << std::setw(static_cast<int>(width)) << f.feature
        << std::right << std::setw(10) << f.count << std::setw(18) << f.total
        << std::setw(16) << f.mean << std::setw(16) << f.std_dev << "\n";
  }
  out << "stories " << stats.stories << "\n";
  out << "unique_tokens " << stats.unique_tokens << "\n";
  return out.str();
}

}  // namespace storyloop::dataset
