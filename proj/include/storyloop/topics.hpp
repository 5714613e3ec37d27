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

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "storyloop/dataset.hpp"
#include "storyloop/text.hpp"

namespace storyloop::topics {

// Word vectors keyed by lowercased word.
class Lexicon {
 public:
  explicit Lexicon(int dim = 0) : dim_(dim) {}

  // One `word v1 ... vd` line per word; blank lines are skipped. The first
  // line fixes d. A repeated word keeps its first vector.
  static Lexicon parse(std::string_view text);
  static Lexicon load(const std::string& path);

  void add(const std::string& word, const Eigen::VectorXd& vec);
  const Eigen::VectorXd* find(std::string_view word) const;

  int dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }
  const std::map<std::string, Eigen::VectorXd, std::less<>>& entries() const {
    return vectors_;
  }

 private:
  int dim_ = 0;
  std::map<std::string, Eigen::VectorXd, std::less<>> vectors_;
};

// Mean of the lexicon vectors of the known tokens. Throws kNoKnownTokens.
Eigen::VectorXd encode_text(const TokenSequence& tokens, const Lexicon& lexicon);

// softmax(R x). Throws kDimensionMismatch.
Eigen::VectorXd topic_weights(const Eigen::VectorXd& x, const Eigen::MatrixXd& r);

// R^T w. Throws kDimensionMismatch.
Eigen::VectorXd reconstruct(const Eigen::VectorXd& weights,
                            const Eigen::MatrixXd& r);

struct TopicModelConfig {
  int topics = 50;
  double margin = 1.0;
  int negatives = 5;
  double ortho_weight = 1e-3;
  double learning_rate = 0.05;
  int epochs = 20;
  std::uint64_t seed = 13;
};

// Throws kInvalidArgument when a field is out of range.
void validate(const TopicModelConfig& config);

struct LossResult {
  double value = 0.0;
  double hinge = 0.0;
  double ortho = 0.0;
  Eigen::MatrixXd gradient;  // dLoss/dR, K x d
};

// Contrastive max-margin loss of one document against its negatives plus
// the orthogonality penalty on the row-normalised dictionary:
//   sum_n max(0, margin - r.x^ + r.n^) + lambda ||R~ R~^T - I||_F^2
// with r = reconstruct(topic_weights(x^, R), R). Inputs x and n are unit
// normalised first. Throws kZeroVector for zero inputs or dictionary rows,
// kEmptyInput without negatives, kDimensionMismatch on width mismatch.
LossResult loss_and_gradient(const Eigen::VectorXd& x,
                             const std::vector<Eigen::VectorXd>& negatives,
                             const Eigen::MatrixXd& r,
                             const TopicModelConfig& config);

double loss(const Eigen::VectorXd& x,
            const std::vector<Eigen::VectorXd>& negatives,
            const Eigen::MatrixXd& r, const TopicModelConfig& config);

// K x d matrix of seeded Gaussian rows scaled to unit norm.
Eigen::MatrixXd initialize_dictionary(int topics, int dim, std::uint64_t seed);

struct TrainResult {
  Eigen::MatrixXd dictionary;
  std::vector<double> epoch_loss;  // mean loss over all documents after each epoch
  std::size_t documents = 0;       // encodable documents used
  std::size_t skipped = 0;         // documents without known tokens
};

// Plain SGD, one document per step, documents visited in a seeded shuffled
// order each epoch. Negatives are `config.negatives` uniform draws from the
// other documents. Throws kTooFewDocuments when fewer than `config.topics`
// documents are encodable.
TrainResult train(const std::vector<TokenSequence>& documents,
                  const Lexicon& lexicon, const TopicModelConfig& config,
                  const std::function<void(int, double)>& on_epoch = {});

// `k` lexicon words closest in cosine similarity to row `row`, ties broken by
// word. Throws kRowOutOfRange.
std::vector<std::pair<std::string, double>> nearest_words(
    const Eigen::MatrixXd& r, int row, const Lexicon& lexicon, std::size_t k);

int argmax_topic(const Eigen::VectorXd& x, const Eigen::MatrixXd& r);

struct TransitionMatrix {
  Eigen::MatrixXd counts;
  Eigen::MatrixXd probability;  // row-normalised counts; empty rows stay 0
  std::vector<bool> empty_row;

  std::size_t observations() const;
};

// Counts topic transitions between consecutive entries of each character, in
// story order. Entries without known tokens are skipped.
TransitionMatrix transition_matrix(const std::vector<dataset::Story>& stories,
                                   const Eigen::MatrixXd& r,
                                   const Lexicon& lexicon);

// Per world: mean topic weight over the world's encodable entries minus the
// mean over all encodable entries. Stories without a world are counted in
// the overall mean only.
std::map<std::string, Eigen::VectorXd> relative_importance(
    const std::vector<dataset::Story>& stories, const Eigen::MatrixXd& r,
    const Lexicon& lexicon);

// Model file: a `K d` header line then K rows of d numbers.
std::string format_model(const Eigen::MatrixXd& r);
Eigen::MatrixXd parse_model(std::string_view text);
void save_model(const Eigen::MatrixXd& r, const std::string& path);
Eigen::MatrixXd load_model(const std::string& path);

// One `{"from":i,"to":j,"probability":p}` line per nonzero cell.
std::string format_transitions(const TransitionMatrix& m);

// Topic-model documents for a corpus: every entry text and challenge card
// text, METRIC-tokenized.
std::vector<TokenSequence> corpus_documents(
    const std::vector<dataset::Story>& stories);

}  // namespace storyloop::topics
