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

#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "storyloop/error.hpp"
#include "storyloop/topics.hpp"

namespace storyloop::topics {
namespace {

std::optional<Eigen::VectorXd> try_encode(const std::string& text,
                                          const Lexicon& lexicon) {
  try {
    return encode_text(tokenize(text, TokenizerMode::kMetric), lexicon);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNoKnownTokens) return std::nullopt;
    throw;
  }
}

}  // namespace

std::size_t TransitionMatrix::observations() const {
  return static_cast<std::size_t>(counts.sum());
}

TransitionMatrix transition_matrix(const std::vector<dataset::Story>& stories,
                                   const Eigen::MatrixXd& r,
                                   const Lexicon& lexicon) {
  if (r.cols() != lexicon.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dictionary width differs from lexicon width");
  }
  const Eigen::Index k = r.rows();
  TransitionMatrix m;
  m.counts = Eigen::MatrixXd::Zero(k, k);
  for (const dataset::Story& story : stories) {
    std::map<std::string, int> last_topic;
    for (const dataset::Scene& scene : story.scenes) {
      for (const dataset::Entry& e : scene.entries) {
        if (e.is_narrator()) continue;
        auto x = try_encode(e.text, lexicon);
        if (!x) continue;
        const int topic = argmax_topic(*x, r);
        auto [it, fresh] = last_topic.emplace(*e.character_id, topic);
        if (!fresh) {
          m.counts(it->second, topic) += 1.0;
          it->second = topic;
        }
      }
    }
  }
  m.probability = Eigen::MatrixXd::Zero(k, k);
  m.empty_row.assign(static_cast<std::size_t>(k), true);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double total = m.counts.row(i).sum();
    if (total > 0) {
      m.probability.row(i) = m.counts.row(i) / total;
      m.empty_row[static_cast<std::size_t>(i)] = false;
    }
  }
  return m;
}

std::map<std::string, Eigen::VectorXd> relative_importance(
    const std::vector<dataset::Story>& stories, const Eigen::MatrixXd& r,
    const Lexicon& lexicon) {
  const Eigen::Index k = r.rows();
  Eigen::VectorXd overall = Eigen::VectorXd::Zero(k);
  std::size_t overall_n = 0;
  std::map<std::string, std::pair<Eigen::VectorXd, std::size_t>> worlds;
  for (const dataset::Story& story : stories) {
    for (const dataset::Scene& scene : story.scenes) {
      for (const dataset::Entry& e : scene.entries) {
        auto x = try_encode(e.text, lexicon);
        if (!x) continue;
        const Eigen::VectorXd w = topic_weights(*x, r);
        overall += w;
        ++overall_n;
        if (story.world) {
          auto& slot = worlds[*story.world];
          if (slot.second == 0) slot.first = Eigen::VectorXd::Zero(k);
          slot.first += w;
          ++slot.second;
        }
      }
    }
  }
  std::map<std::string, Eigen::VectorXd> out;
  if (overall_n == 0) return out;
  overall /= static_cast<double>(overall_n);
  for (const auto& [world, acc] : worlds) {
    out[world] = acc.first / static_cast<double>(acc.second) - overall;
  }
  return out;
}

std::string format_transitions(const TransitionMatrix& m) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < m.probability.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.probability.cols(); ++j) {
      if (m.probability(i, j) == 0.0) continue;
      out << "{\"from\":" << i << ",\"to\":" << j
          << ",\"probability\":" << m.probability(i, j) << "}\n";
    }
  }
  return out.str();
}

}  // namespace storyloop::topics
