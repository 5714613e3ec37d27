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

// Acceptance run: one PASS/FAIL line per headline criterion.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "storyloop/dataset.hpp"
#include "storyloop/error.hpp"
#include "storyloop/metrics.hpp"
#include "storyloop/packing.hpp"
#include "storyloop/service.hpp"
#include "storyloop/topics.hpp"

using namespace storyloop;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

TokenSequence letters(const std::string& s) {
  std::vector<std::string> out;
  for (char c : s) out.emplace_back(1, c);
  return TokenSequence(out);
}

// ---------------------------------------------------------------------------

Outcome locality_example() {
  const TokenSequence x = letters("ABCDEFG");
  const TokenSequence y1 = letters("ABCDHIK");
  const TokenSequence y2 = letters("AHBKCID");
  const double want = 4.0 / 7.0;
  double worst = 0;
  for (const auto* y : {&y1, &y2}) {
    const auto r = rouge_l(x, *y);
    for (double v : {r.precision, r.recall, r.f1}) worst = std::max(worst, std::abs(v - want));
  }
  const double w1 = rouge_w(x, y1, 2.0).precision;
  const double w2 = rouge_w(x, y2, 2.0).precision;
  worst = std::max({worst, std::abs(w1 - 4.0 / 7.0), std::abs(w2 - 2.0 / 7.0)});
  std::ostringstream d;
  d << "rouge_w(Y1)=" << w1 << " rouge_w(Y2)=" << w2 << " max_err=" << worst;
  return {worst <= 1e-12, d.str()};
}

struct UserTrials {
  std::size_t trials = 0;
  std::size_t mismatches = 0;
  std::size_t bound_violations = 0;
  double seconds = 0;
};

UserTrials run_user_trials() {
  UserTrials t;
  const auto start = Clock::now();
  std::mt19937_64 rng(20260101);
  std::uniform_int_distribution<int> len(1, 12), sym(0, 3), flag(0, 1);
  const std::string alphabet = "abcd";
  for (; t.trials < 10000; ++t.trials) {
    std::string xs, ys;
    for (int i = len(rng); i > 0; --i) xs += alphabet[sym(rng)];
    for (int i = len(rng); i > 0; --i) ys += alphabet[sym(rng)];
    std::vector<std::string> stop;
    std::set<std::string> stop_set;
    for (char c : alphabet) {
      if (flag(rng)) {
        stop.emplace_back(1, c);
        stop_set.emplace(1, c);
      }
    }
    const StopwordList list(stop, "trial");
    const TokenSequence x = letters(xs), y = letters(ys);
    const auto got = user_matches(x, y, list);
    const auto want = oracle::user_matches(x.tokens, y.tokens, stop_set);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = got[i].start_x == want[i].sx && got[i].start_y == want[i].sy &&
             got[i].length == want[i].len && got[i].counted == want[i].counted;
    }
    if (!same) ++t.mismatches;
    if (user_score(x, y, list).precision > rouge_l(x, y).precision) ++t.bound_violations;
  }
  t.seconds = seconds_since(start);
  return t;
}

Outcome user_oracle(const UserTrials& t) {
  std::ostringstream d;
  d << t.trials << " pairs, " << t.mismatches << " mismatches, " << t.seconds << " s";
  return {t.trials >= 10000 && t.mismatches == 0 && t.seconds < 60, d.str()};
}

Outcome subset_bound(const UserTrials& t) {
  std::ostringstream d;
  d << t.trials << " pairs, " << t.bound_violations << " with USER > ROUGE-L";
  return {t.bound_violations == 0, d.str()};
}

Outcome solver_oracle() {
  const auto start = Clock::now();
  const auto grid = oracle::solver_grid();
  std::size_t mismatches = 0, infeasible = 0;
  for (const auto& inst : grid) {
    const auto want = oracle::solve(inst);
    try {
      const auto got = packing::solve(inst.specs, inst.constraints, inst.budget);
      if (!want || got.lengths != *want) ++mismatches;
    } catch (const Error& e) {
      if (want || e.code() != ErrorCode::kInfeasible) ++mismatches;
      else ++infeasible;
    }
  }
  const double secs = seconds_since(start);
  std::ostringstream d;
  d << grid.size() << " instances (" << infeasible << " infeasible), " << mismatches
    << " mismatches, " << secs << " s";
  return {grid.size() >= 1000 && mismatches == 0 && secs < 120, d.str()};
}

Outcome embedding_sums() {
  using packing::ComposedContext;
  using packing::EmbeddingTables;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> val(-9, 9), small(1, 4);
  auto table = [&](int rows, int d) {
    Eigen::MatrixXd m(rows, d);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = val(rng);
    return m;
  };
  std::size_t failures = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int d = small(rng), vocab = small(rng) + 1, segs = small(rng) + 1, len = small(rng) + 2;
    ComposedContext ctx;
    for (int i = 0; i < len; ++i) {
      packing::ContextItem item;
      item.token = std::uniform_int_distribution<int>(0, vocab - 1)(rng);
      item.position = static_cast<std::size_t>(i);
      for (int s = 0; s < segs; ++s)
        if (std::uniform_int_distribution<int>(0, 1)(rng)) item.segments.push_back(s);
      ctx.items.push_back(item);
    }
    const EmbeddingTables a{table(vocab, d), table(len, d), table(segs, d)};
    const EmbeddingTables b{table(vocab, d), table(len, d), table(segs, d)};
    const EmbeddingTables sum{a.token + b.token, a.position + b.position,
                              a.segment + b.segment};
    const Eigen::MatrixXd ea = packing::compose_embeddings(ctx, a);
    if (packing::compose_embeddings(ctx, sum) != ea + packing::compose_embeddings(ctx, b))
      ++failures;
    ComposedContext shuffled = ctx;
    for (auto& item : shuffled.items) std::shuffle(item.segments.begin(), item.segments.end(), rng);
    if (packing::compose_embeddings(shuffled, a) != ea) ++failures;
  }
  ComposedContext hand;
  hand.items.push_back({0, 0, {0, 1}});
  EmbeddingTables t{Eigen::MatrixXd(1, 2), Eigen::MatrixXd(1, 2), Eigen::MatrixXd(2, 2)};
  t.position << 1, 0;
  t.token << 0, 1;
  t.segment << 2, 2, 3, 0;
  const Eigen::MatrixXd row = packing::compose_embeddings(hand, t);
  const bool hand_ok = row(0, 0) == 6 && row(0, 1) == 3;
  std::ostringstream d;
  d << "100 tables, " << failures << " failures; hand row (" << row(0, 0) << ","
    << row(0, 1) << ")";
  return {failures == 0 && hand_ok, d.str()};
}

Outcome topic_model() {
  using namespace topics;
  // Gradient check.
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 1 + trial % 3, d = 2 + trial % 3;
    TopicModelConfig cfg;
    cfg.topics = k;
    cfg.ortho_weight = 0.1;
    Eigen::MatrixXd r(k, d);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < d; ++j) r(i, j) = n(rng);
    Eigen::VectorXd x(d);
    for (int j = 0; j < d; ++j) x(j) = n(rng);
    std::vector<Eigen::VectorXd> negs(2, Eigen::VectorXd(d));
    for (auto& v : negs)
      for (int j = 0; j < d; ++j) v(j) = n(rng);
    const Eigen::MatrixXd g = loss_and_gradient(x, negs, r, cfg).gradient;
    Eigen::MatrixXd num(k, d);
    const double h = 1e-6;
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < d; ++j) {
        Eigen::MatrixXd up = r, down = r;
        up(i, j) += h;
        down(i, j) -= h;
        num(i, j) = (loss(x, negs, up, cfg) - loss(x, negs, down, cfg)) / (2 * h);
      }
    }
    worst = std::max(worst, (g - num).norm() / std::max({g.norm(), num.norm(), 1e-8}));
  }

  // Planted clusters.
  const auto start = Clock::now();
  const auto corpus = fixtures::planted_corpus();
  TopicModelConfig cfg;
  cfg.topics = 3;
  const TrainResult res = train(corpus.documents, corpus.lexicon, cfg);
  const double agreement = fixtures::cluster_agreement(corpus, res.dictionary);
  const double secs = seconds_since(start);

  // Transition rows on a real story.
  const std::vector<dataset::Story> stories = {dataset::load_story(fixtures::story_json())};
  Lexicon lex(2);
  lex.add("ana", Eigen::Vector2d(1, 0));
  lex.add("bo", Eigen::Vector2d(0, 1));
  lex.add("boats", Eigen::Vector2d(0.2, 1));
  const TransitionMatrix m = transition_matrix(stories, Eigen::MatrixXd::Identity(2, 2), lex);
  double row_err = 0;
  for (Eigen::Index i = 0; i < m.probability.rows(); ++i) {
    if (!m.empty_row[static_cast<std::size_t>(i)])
      row_err = std::max(row_err, std::abs(m.probability.row(i).sum() - 1.0));
  }

  std::ostringstream d;
  d << "grad_rel_err=" << worst << " agreement=" << agreement << " train=" << secs
    << " s row_sum_err=" << row_err;
  return {worst < 1e-4 && agreement >= 0.9 && secs < 60 && row_err <= 1e-9, d.str()};
}

Outcome statistics() {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1.0);
  std::uniform_int_distribution<int> cat(0, 4);
  double pearson_err = 0, kappa_err = 0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a, b;
    for (int i = 0; i < 4 + trial; ++i) {
      a.push_back(n(rng));
      b.push_back(0.3 * a.back() + n(rng));
    }
    pearson_err = std::max(pearson_err, std::abs(pearson_r(a, b).r - oracle::pearson(a, b)));

    const int items = 3 + trial % 5, raters = 2 + trial % 4;
    std::vector<std::vector<int>> rows(items, std::vector<int>(5, 0));
    for (auto& row : rows)
      for (int r = 0; r < raters; ++r) ++row[cat(rng)];
    kappa_err = std::max(kappa_err, std::abs(fleiss_kappa(RatingsMatrix(rows)) -
                                             oracle::fleiss(rows)));
  }
  const double unanimous = fleiss_kappa(RatingsMatrix({{0, 4, 0}, {0, 4, 0}, {0, 4, 0}}));
  std::ostringstream d;
  d << "pearson_err=" << pearson_err << " kappa_err=" << kappa_err
    << " unanimous_kappa=" << unanimous;
  return {pearson_err <= 1e-10 && kappa_err <= 1e-3 && unanimous == 1.0, d.str()};
}

Outcome split_balance() {
  const auto w = fixtures::lognormal_weights(100, 42);
  const auto a = dataset::split_weights(w, dataset::SplitRatios{}, 42);
  const double targets[] = {0.8, 0.1, 0.1};
  double dev = 0;
  for (int i = 0; i < 3; ++i) dev = std::max(dev, std::abs(a.token_ratio[i] - targets[i]));
  std::ostringstream d;
  d << "stories " << a.stories[0] << "/" << a.stories[1] << "/" << a.stories[2]
    << " max_token_ratio_dev=" << dev;
  const bool counts = a.stories == std::array<std::size_t, 3>{80, 10, 10};
  return {counts && dev <= 0.01, d.str()};
}

Outcome end_to_end() {
  fixtures::TempDir dir;
  service::ServiceOptions opts;
  opts.data_dir = dir.str();
  opts.clock = [] { return std::string("2026-01-01T00:00:00Z"); };
  std::string before;
  std::size_t exact = 0, checked = 0;
  {
    service::Service svc(opts);
    svc.register_model("mock", "mock:");
    svc.register_model("mock-b", "mock:");
    svc.put_story(dataset::load_story(fixtures::story_json()));
    const service::Coordinates targets[] = {
        {"harbor", 0, 1}, {"harbor", 0, 3}, {"harbor", 1, 0}, {"harbor", 1, 1}};
    int k = 0;
    for (const auto& where : targets) {
      for (const char* model : {"mock", "mock-b"}) {
        const auto s = svc.suggest(where, model, {});
        const std::string edited =
            s.generated.substr(0, s.generated.size() / 2) + " The gulls returned.";
        service::Ratings r;
        r.values = {1 + k % 5, 1 + (3 * k) % 5, 2 + k % 3, 5 - k % 4};
        ++k;
        const auto p = svc.publish(s.id, edited, r, std::nullopt);
        const auto direct = user_score(tokenize(s.generated, TokenizerMode::kMetric),
                                       tokenize(edited, TokenizerMode::kMetric));
        const fixtures::json stored = svc.record(s.id)["published"]["scores"]["user"];
        ++checked;
        if (p.scores && p.scores->user == direct &&
            stored["precision"].get<double>() == direct.precision &&
            stored["recall"].get<double>() == direct.recall &&
            stored["f1"].get<double>() == direct.f1)
          ++exact;
      }
    }
    before = svc.dashboard().dump();
  }
  service::Service restarted(opts);
  const std::string after = restarted.dashboard().dump();
  std::ostringstream d;
  d << exact << "/" << checked << " stored USER scores exact; replay "
    << (after == before ? "identical" : "differs") << " (" << before.size() << " bytes)";
  return {exact == checked && checked > 0 && after == before, d.str()};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  UserTrials trials;
  bool trials_done = false;
  auto shared_trials = [&]() -> const UserTrials& {
    if (!trials_done) {
      trials = run_user_trials();
      trials_done = true;
    }
    return trials;
  };
  const std::vector<Criterion> criteria = {
      {"rouge-locality-example", locality_example},
      {"user-oracle-equivalence", [&] { return user_oracle(shared_trials()); }},
      {"user-subset-bound", [&] { return subset_bound(shared_trials()); }},
      {"solver-oracle-grid", solver_oracle},
      {"segment-embedding-sums", embedding_sums},
      {"topic-model", topic_model},
      {"agreement-statistics", statistics},
      {"split-balance", split_balance},
      {"end-to-end-mock", end_to_end},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS " : "FAIL ") << c.name << ": " << o.detail << "\n";
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
