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
#include <numeric>
#include <random>

#include "storyloop/error.hpp"
#include "storyloop/topics.hpp"

namespace storyloop::topics {

TrainResult train(const std::vector<TokenSequence>& documents,
                  const Lexicon& lexicon, const TopicModelConfig& config,
                  const std::function<void(int, double)>& on_epoch) {
  validate(config);
  if (lexicon.dim() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "empty lexicon");
  }
  TrainResult result;
  std::vector<Eigen::VectorXd> encoded;
  for (const TokenSequence& doc : documents) {
    try {
      encoded.push_back(encode_text(doc, lexicon));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kNoKnownTokens) throw;
      ++result.skipped;
      continue;
    }
    if (!(encoded.back().norm() > 0)) {
      encoded.pop_back();
      ++result.skipped;
    }
  }
  result.documents = encoded.size();
  if (encoded.size() < static_cast<std::size_t>(config.topics) ||
      encoded.size() < 2) {
    throw Error(ErrorCode::kTooFewDocuments,
                std::to_string(encoded.size()) +
                    " encodable documents for " +
                    std::to_string(config.topics) + " topics");
  }

  std::mt19937_64 rng(config.seed);
  result.dictionary =
      initialize_dictionary(config.topics, lexicon.dim(), rng());
  Eigen::MatrixXd& r = result.dictionary;

  const std::size_t n = encoded.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::uniform_int_distribution<std::size_t> other(0, n - 2);
  const auto q = static_cast<std::size_t>(config.negatives);
  auto draw = [&](std::size_t i, std::vector<Eigen::VectorXd>& out) {
    out.resize(q);
    for (Eigen::VectorXd& neg : out) {
      std::size_t j = other(rng);
      if (j >= i) ++j;
      neg = encoded[j];
    }
  };

  // Epoch losses are measured on one fixed negative sample so that the
  // reported curve moves only with R, not with the draws.
  std::vector<std::vector<Eigen::VectorXd>> eval_negatives(n);
  for (std::size_t i = 0; i < n; ++i) draw(i, eval_negatives[i]);

  std::vector<Eigen::VectorXd> negatives;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      draw(i, negatives);
      r -= config.learning_rate *
           loss_and_gradient(encoded[i], negatives, r, config).gradient;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      total += loss(encoded[i], eval_negatives[i], r, config);
    }
    const double mean = total / static_cast<double>(n);
    result.epoch_loss.push_back(mean);
    if (on_epoch) on_epoch(epoch, mean);
  }
  return result;
}

std::vector<TokenSequence> corpus_documents(
    const std::vector<dataset::Story>& stories) {
  std::vector<TokenSequence> docs;
  for (const dataset::Story& story : stories) {
    for (const dataset::Card& card : story.cards) {
      if (card.kind != dataset::CardKind::kChallenge) continue;
      docs.push_back(tokenize(card.title + "\n" + card.description,
                              TokenizerMode::kMetric));
    }
    for (const dataset::Scene& scene : story.scenes) {
      for (const dataset::Entry& e : scene.entries) {
        docs.push_back(tokenize(e.text, TokenizerMode::kMetric));
      }
    }
  }
  return docs;
}

}  // namespace storyloop::topics
