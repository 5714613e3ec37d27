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

#include <random>

#include "doctest.h"
#include "fixtures.hpp"
#include "storyloop/error.hpp"
#include "storyloop/topics.hpp"

using namespace storyloop;
using namespace storyloop::topics;

namespace {

Eigen::VectorXd random_vector(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v(i) = n(rng);
  return v;
}

// Relative error between the analytic gradient and central differences.
double gradient_error(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> kd(1, 3), dd(2, 4), nq(1, 3);
  const int k = kd(rng), d = dd(rng);
  TopicModelConfig cfg;
  cfg.topics = k;
  cfg.margin = 1.0;
  cfg.ortho_weight = 0.1;
  Eigen::MatrixXd r(k, d);
  for (int i = 0; i < k; ++i) r.row(i) = random_vector(d, rng).transpose();
  const Eigen::VectorXd x = random_vector(d, rng);
  std::vector<Eigen::VectorXd> negs;
  for (int i = nq(rng); i > 0; --i) negs.push_back(random_vector(d, rng));

  const Eigen::MatrixXd analytic = loss_and_gradient(x, negs, r, cfg).gradient;
  Eigen::MatrixXd numeric(k, d);
  const double h = 1e-6;
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < d; ++j) {
      Eigen::MatrixXd up = r, down = r;
      up(i, j) += h;
      down(i, j) -= h;
      numeric(i, j) = (loss(x, negs, up, cfg) - loss(x, negs, down, cfg)) / (2 * h);
    }
  }
  const double scale = std::max({analytic.norm(), numeric.norm(), 1e-8});
  return (analytic - numeric).norm() / scale;
}

Lexicon two_word_lexicon() {
  Lexicon lex(2);
  lex.add("sun", Eigen::Vector2d(1, 0));
  lex.add("moon", Eigen::Vector2d(0, 1));
  return lex;
}

}  // namespace

TEST_SUITE("topics") {
  TEST_CASE("lexicon parsing") {
    const Lexicon lex = Lexicon::parse("Sun 1 0\n\nmoon 0 1\nsun 5 5\n");
    CHECK(lex.dim() == 2);
    CHECK(lex.size() == 2);
    REQUIRE(lex.find("sun"));
    CHECK((*lex.find("sun"))(0) == 1.0);
    CHECK_THROWS_AS(Lexicon::parse("a 1 2\nb 1\n"), Error);
  }

  TEST_CASE("encoding averages known tokens") {
    const Lexicon lex = two_word_lexicon();
    const Eigen::VectorXd v = encode_text(TokenSequence{"sun", "moon", "zzz"}, lex);
    CHECK(v(0) == 0.5);
    CHECK(v(1) == 0.5);
    CHECK_THROWS_AS(encode_text(TokenSequence{"zzz"}, lex), Error);
  }

  TEST_CASE("topic weights form a distribution") {
    Eigen::MatrixXd r(3, 2);
    r << 1, 0, 0, 1, 500, 500;
    const Eigen::VectorXd w = topic_weights(Eigen::Vector2d(1, 1), r);
    CHECK(w.sum() == doctest::Approx(1.0));
    CHECK(w(2) == doctest::Approx(1.0));
    CHECK_THROWS_AS(topic_weights(Eigen::Vector3d(1, 1, 1), r), Error);
  }

  TEST_CASE("analytic gradient matches finite differences") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) CHECK(gradient_error(rng) < 1e-4);
  }

  TEST_CASE("loss errors") {
    TopicModelConfig cfg;
    const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(loss(Eigen::Vector2d(0, 0), {Eigen::Vector2d(1, 0)}, r, cfg), Error);
    CHECK_THROWS_AS(loss(Eigen::Vector2d(1, 0), {}, r, cfg), Error);
    cfg.learning_rate = -1;
    CHECK_THROWS_AS(validate(cfg), Error);
  }

  TEST_CASE("dictionary initialisation is seeded and normalised") {
    const Eigen::MatrixXd a = initialize_dictionary(4, 3, 9);
    CHECK(a.isApprox(initialize_dictionary(4, 3, 9)));
    for (int i = 0; i < 4; ++i) CHECK(a.row(i).norm() == doctest::Approx(1.0));
  }

  TEST_CASE("planted clusters are recovered") {
    const auto corpus = fixtures::planted_corpus();
    TopicModelConfig cfg;
    cfg.topics = 3;
    const TrainResult res = train(corpus.documents, corpus.lexicon, cfg);
    CHECK(res.documents == corpus.documents.size());
    CHECK(res.epoch_loss.size() == static_cast<std::size_t>(cfg.epochs));
    CHECK(fixtures::cluster_agreement(corpus, res.dictionary) >= 0.9);
    const TrainResult again = train(corpus.documents, corpus.lexicon, cfg);
    CHECK(again.dictionary == res.dictionary);
  }

  TEST_CASE("epoch loss does not rise over the first five epochs") {
    // The planted corpus converges within one epoch; afterwards SGD only
    // jitters around the plateau, so rises below 0.1% are tolerated.
    const auto corpus = fixtures::planted_corpus();
    TopicModelConfig cfg;
    cfg.topics = 3;
    const auto loss = train(corpus.documents, corpus.lexicon, cfg).epoch_loss;
    for (int e = 1; e < 5; ++e) CHECK(loss[e] <= loss[e - 1] * (1 + 1e-3));
  }

  TEST_CASE("zero epochs return the seeded initialisation") {
    const auto corpus = fixtures::planted_corpus();
    TopicModelConfig cfg;
    cfg.topics = 3;
    cfg.epochs = 0;
    const TrainResult res = train(corpus.documents, corpus.lexicon, cfg);
    CHECK(res.epoch_loss.empty());
    std::mt19937_64 rng(cfg.seed);
    CHECK(res.dictionary == initialize_dictionary(3, 16, rng()));
  }

  TEST_CASE("too few documents") {
    TopicModelConfig cfg;
    cfg.topics = 5;
    try {
      train({TokenSequence{"sun"}, TokenSequence{"moon"}}, two_word_lexicon(), cfg);
      FAIL("expected throw");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kTooFewDocuments);
    }
  }

  TEST_CASE("nearest words") {
    Eigen::MatrixXd r(1, 2);
    r << 1, 0.1;
    const auto near = nearest_words(r, 0, two_word_lexicon(), 2);
    REQUIRE(near.size() == 2);
    CHECK(near[0].first == "sun");
    CHECK_THROWS_AS(nearest_words(r, 3, two_word_lexicon(), 1), Error);
  }

  TEST_CASE("transitions follow each character") {
    fixtures::json doc = fixtures::story_json();
    auto& s0 = doc["scenes"][0]["entries"];
    s0[1]["text"] = "sun";
    s0[2]["text"] = "moon moon";  // Bo, a single entry in scene 0
    s0[3]["text"] = "moon";
    auto& s1 = doc["scenes"][1]["entries"];
    s1[0]["text"] = "moon";
    s1[1]["text"] = "sun";
    const std::vector<dataset::Story> stories = {dataset::load_story(doc)};
    const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(2, 2);
    const TransitionMatrix m = transition_matrix(stories, r, two_word_lexicon());
    // Ana: sun -> moon -> sun. Bo: moon -> moon.
    CHECK(m.counts(0, 1) == 1.0);
    CHECK(m.counts(1, 0) == 1.0);
    CHECK(m.counts(1, 1) == 1.0);
    CHECK(m.counts(0, 0) == 0.0);
    CHECK(m.observations() == 3);
    for (int i = 0; i < 2; ++i) {
      CHECK(std::abs(m.probability.row(i).sum() - 1.0) < 1e-9);
    }
    CHECK(m.probability(1, 0) == 0.5);
    CHECK(format_transitions(m).find("\"from\":0") != std::string::npos);
  }

  TEST_CASE("relative importance sums to zero over worlds weighted by size") {
    const std::vector<dataset::Story> stories = {
        dataset::load_story(fixtures::story_json())};
    Lexicon lex(2);
    lex.add("ana", Eigen::Vector2d(1, 0));
    lex.add("bo", Eigen::Vector2d(0, 1));
    const auto imp = relative_importance(stories, Eigen::MatrixXd::Identity(2, 2), lex);
    REQUIRE(imp.count("coast"));
    // A single world is the whole corpus.
    CHECK(imp.at("coast").norm() < 1e-12);
  }

  TEST_CASE("model file round trip") {
    Eigen::MatrixXd r(2, 3);
    r << 1.5, -2, 0.125, 1e-9, 3, 4;
    const Eigen::MatrixXd back = parse_model(format_model(r));
    CHECK(back == r);
    CHECK_THROWS_AS(parse_model("2 2\n1 2\n"), Error);
  }

  TEST_CASE("corpus documents include challenge cards") {
    const auto docs =
        corpus_documents({dataset::load_story(fixtures::story_json())});
    CHECK(docs.size() == 1 + 6);
    CHECK(docs[0].tokens[0] == "the");
  }
}
