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

// Randomised invariant checks with small hand-rolled generators.

#include <algorithm>
#include <cctype>
#include <random>
#include <thread>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "storyloop/dataset.hpp"
#include "storyloop/metrics.hpp"
#include "storyloop/packing.hpp"
#include "storyloop/service.hpp"
#include "storyloop/topics.hpp"

using namespace storyloop;

namespace {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  double real() { return std::normal_distribution<double>(0.0, 1.0)(rng_); }
  std::mt19937_64& rng() { return rng_; }

  // Mixed ASCII prose with punctuation, whitespace runs and a few
  // multi-byte letters.
  std::string text(int max_len) {
    static const std::vector<std::string> pieces = {
        "a", "b", "Z", "7", " ", "  ", "\t", "\n", ",", ".", "!", "?", "--",
        "'", "é", "ß", "Ω", "(", ")", "x9", "...", ". "};
    std::string out;
    for (int i = integer(0, max_len); i > 0; --i) {
      out += pieces[static_cast<std::size_t>(integer(0, static_cast<int>(pieces.size()) - 1))];
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

// Counts STATS tokens of ASCII text by walking characters.
std::size_t stats_runs(const std::string& s) {
  std::size_t count = 0;
  std::size_t i = 0;
  while (i < s.size()) {
    const bool alnum = std::isalnum(static_cast<unsigned char>(s[i])) != 0;
    bool only_space = true;
    while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) != 0) == alnum) {
      if (!std::isspace(static_cast<unsigned char>(s[i]))) only_space = false;
      ++i;
    }
    if (alnum || !only_space) ++count;
  }
  return count;
}

std::vector<std::string> lex_violations(const std::vector<std::pair<int, double>>& v) {
  std::vector<std::string> out;
  for (const auto& [level, sum] : v) out.push_back(std::to_string(level) + ":" + std::to_string(sum));
  return out;
}

}  // namespace

TEST_SUITE("text") {
  TEST_CASE("metric tokens survive re-serialisation") {
    Gen g(1);
    for (int i = 0; i < 500; ++i) {
      const auto toks = tokenize(g.text(30), TokenizerMode::kMetric).tokens;
      CHECK(tokenize(join(toks, " "), TokenizerMode::kMetric).tokens == toks);
    }
  }

  TEST_CASE("stats token count matches a character walk") {
    Gen g(2);
    const std::string ascii = "ab7 ,.!?\t\n-'()";
    for (int i = 0; i < 500; ++i) {
      std::string s;
      for (int k = g.integer(0, 40); k > 0; --k) s += ascii[static_cast<std::size_t>(g.integer(0, static_cast<int>(ascii.size()) - 1))];
      CHECK(tokenize(s, TokenizerMode::kStats).size() == stats_runs(s));
    }
  }

  TEST_CASE("sentence truncation is a prefix and a fixed point") {
    Gen g(3);
    for (int i = 0; i < 500; ++i) {
      const std::string t = g.text(40);
      const std::size_t n = static_cast<std::size_t>(g.integer(1, 4));
      const std::string once = truncate_sentences(t, n);
      CHECK(t.rfind(once, 0) == 0);
      CHECK(truncate_sentences(once, n) == once);
      CHECK(count_sentences(once) <= n);
    }
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("user precision and recall swap when no pivot ties") {
    Gen g(4);
    const StopwordList stop({"a"}, "t");
    int checked = 0;
    for (int i = 0; i < 4000; ++i) {
      std::vector<std::string> x, y;
      for (int k = g.integer(1, 10); k > 0; --k) x.push_back(std::string(1, "abcde"[g.integer(0, 4)]));
      for (int k = g.integer(1, 10); k > 0; --k) y.push_back(std::string(1, "abcde"[g.integer(0, 4)]));
      if (!oracle::pivots_unique(x, y)) continue;
      ++checked;
      const auto xy = user_score(TokenSequence(x), TokenSequence(y), stop);
      const auto yx = user_score(TokenSequence(y), TokenSequence(x), stop);
      CHECK(xy.precision == yx.recall);
      CHECK(xy.recall == yx.precision);
    }
    CHECK(checked >= 500);
  }

  TEST_CASE("tied pivots break towards the first argument") {
    // "ec" and "bc" tie; each order picks the run earliest in its own
    // first argument and the recursions diverge from there.
    const TokenSequence x(std::vector<std::string>{"c", "e", "e", "c", "e", "e", "a", "b", "c", "e"});
    const TokenSequence y(std::vector<std::string>{"b", "c", "b", "c", "b", "e", "c", "b", "c"});
    const StopwordList none({}, "t");
    CHECK(user_score(x, y, none).matched_tokens == 5);
    CHECK(user_score(y, x, none).matched_tokens == 3);
  }

  TEST_CASE("scores are identical across threads") {
    const std::string gen = "The storm broke the pier, and the boats drifted out to sea.";
    const std::string pub = "The storm broke the old pier; two boats drifted to sea.";
    const PairScores ref = score_pair(gen, pub);
    std::vector<PairScores> results(8);
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < results.size(); ++t) {
      threads.emplace_back([&, t] { results[t] = score_pair(gen, pub); });
    }
    for (auto& t : threads) t.join();
    for (const auto& r : results) {
      CHECK(r.user == ref.user);
      CHECK(r.rouge_l == ref.rouge_l);
      CHECK(r.rouge_w == ref.rouge_w);
    }
  }

  TEST_CASE("diff reconstruction on random edits") {
    Gen g(5);
    for (int i = 0; i < 300; ++i) {
      const std::string a = g.text(25), b = g.text(25);
      std::string left, right;
      for (const auto& s : diff_segments(a, b)) {
        if (s.kind != DiffClass::kAdded) left += s.text;
        if (s.kind != DiffClass::kDeleted) right += s.text;
      }
      CHECK(left == a);
      CHECK(right == b);
    }
  }
}

TEST_SUITE("packing") {
  TEST_CASE("a larger budget never worsens the violation vector") {
    const auto grid = oracle::solver_grid();
    for (std::size_t i = 0; i < grid.size(); i += 5) {
      const auto& inst = grid[i];
      std::vector<std::pair<int, double>> prev;
      bool have_prev = false;
      for (std::int64_t budget = 0; budget <= 20; budget += 4) {
        packing::Allocation a;
        try {
          a = packing::solve(inst.specs, inst.constraints, budget);
        } catch (const Error&) {
          continue;
        }
        const auto v = packing::violations(inst.specs, inst.constraints, a);
        if (have_prev) {
          std::vector<double> cur_sums, prev_sums;
          for (const auto& p : v) cur_sums.push_back(p.second);
          for (const auto& p : prev) prev_sums.push_back(p.second);
          INFO(lex_violations(prev), " -> ", lex_violations(v));
          CHECK_FALSE(prev_sums < cur_sums);
        }
        prev = v;
        have_prev = true;
      }
    }
  }

  TEST_CASE("pack respects the budget and token order") {
    Gen g(6);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<packing::PackInput> bundle;
      std::map<std::string, packing::TokenId> seps;
      const int n = g.integer(1, 4);
      for (int s = 0; s < n; ++s) {
        packing::PackInput in;
        in.spec.name = "s" + std::to_string(s);
        in.spec.segment_ids = {s};
        in.spec.declared_index = s;
        in.spec.trim = g.integer(0, 1) ? packing::Trim::kHead : packing::Trim::kTail;
        for (int k = g.integer(0, 8); k > 0; --k) in.tokens.push_back(100 * (s + 1) + k);
        std::reverse(in.tokens.begin(), in.tokens.end());
        in.spec.available = static_cast<std::int64_t>(in.tokens.size());
        seps[in.spec.name] = s;
        bundle.push_back(in);
      }
      std::vector<packing::Constraint> cons = {
          {"floor", {packing::Term{"s0"}}, packing::Relation::kGe,
           packing::Fraction::integer(g.integer(0, 6)), packing::Priority::strength(2)}};
      const std::int64_t budget = g.integer(n, 24);
      const auto ctx = packing::pack(bundle, cons, budget, seps);
      CHECK(static_cast<std::int64_t>(ctx.size()) <= budget);
      for (int s = 0; s < n; ++s) {
        std::vector<packing::TokenId> emitted;
        for (const auto& item : ctx.items) {
          if (item.segments == std::vector<packing::SegmentId>{s} && item.token >= 100) {
            emitted.push_back(item.token);
          }
        }
        const auto& src = bundle[static_cast<std::size_t>(s)].tokens;
        const auto len = emitted.size();
        const bool head = bundle[static_cast<std::size_t>(s)].spec.trim == packing::Trim::kHead;
        const std::vector<packing::TokenId> want =
            head ? std::vector<packing::TokenId>(src.begin(), src.begin() + len)
                 : std::vector<packing::TokenId>(src.end() - len, src.end());
        CHECK(emitted == want);
      }
    }
  }
}

TEST_SUITE("dataset") {
  TEST_CASE("split is a deterministic partition") {
    Gen g(7);
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<std::pair<std::string, std::int64_t>> w;
      for (int i = g.integer(3, 60); i > 0; --i) w.emplace_back("s" + std::to_string(i), g.integer(1, 5000));
      const auto seed = static_cast<std::uint64_t>(g.integer(0, 1000));
      const auto a = dataset::split_weights(w, dataset::SplitRatios{}, seed);
      CHECK(a.assignment.size() == w.size());
      CHECK(a.stories[0] + a.stories[1] + a.stories[2] == w.size());
      std::int64_t total = 0;
      for (const auto& [id, t] : w) total += t;
      CHECK(a.tokens[0] + a.tokens[1] + a.tokens[2] == total);
      CHECK(dataset::to_json(dataset::split_weights(w, dataset::SplitRatios{}, seed)).dump() ==
            dataset::to_json(a).dump());
    }
  }

  TEST_CASE("stats do not depend on story order") {
    std::vector<dataset::Story> corpus;
    for (const char* id : {"a", "b", "c"}) corpus.push_back(dataset::load_story(fixtures::story_json(id)));
    corpus[1].scenes.pop_back();
    const auto base = dataset::to_json(dataset::compute_stats(corpus)).dump();
    std::reverse(corpus.begin(), corpus.end());
    CHECK(dataset::to_json(dataset::compute_stats(corpus)).dump() == base);
  }

  TEST_CASE("bundle availability equals the stats token count") {
    const auto story = dataset::load_story(fixtures::story_json());
    for (std::size_t s = 0; s < story.scenes.size(); ++s) {
      for (std::size_t e = 0; e < story.scenes[s].entries.size(); ++e) {
        if (story.scenes[s].entries[e].is_narrator()) continue;
        for (const auto& seg : dataset::build_generation_example(story, s, e).segments) {
          CHECK(seg.spec.available == static_cast<std::int64_t>(seg.tokens.size()));
        }
      }
    }
  }
}

TEST_SUITE("topics") {
  TEST_CASE("weights, reconstruction and rescaling") {
    Gen g(8);
    for (int trial = 0; trial < 200; ++trial) {
      const int k = g.integer(2, 5), d = g.integer(1, 6);
      Eigen::MatrixXd r(k, d);
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < d; ++j) r(i, j) = g.real();
      Eigen::VectorXd x(d);
      for (int j = 0; j < d; ++j) x(j) = g.real();
      const Eigen::VectorXd w = topics::topic_weights(x, r);
      CHECK(std::abs(w.sum() - 1.0) < 1e-6);
      CHECK((w.array() > 0).all());
      CHECK(topics::argmax_topic(3.5 * x, r) == topics::argmax_topic(x, r));
      const int row = g.integer(0, k - 1);
      CHECK(topics::reconstruct(Eigen::VectorXd::Unit(k, row), r) == r.row(row).transpose());
    }
  }
}

TEST_SUITE("service") {
  TEST_CASE("concurrent suggestions and publications keep the log whole") {
    fixtures::TempDir dir;
    service::ServiceOptions opts;
    opts.data_dir = dir.str();
    std::string before;
    {
      service::Service svc(opts);
      svc.register_model("m1", "mock:");
      svc.register_model("m2", "mock:");
      svc.put_story(dataset::load_story(fixtures::story_json()));
      std::vector<std::thread> threads;
      std::vector<std::vector<std::string>> ids(6);
      for (int t = 0; t < 6; ++t) {
        threads.emplace_back([&, t] {
          service::GenerationConfig cfg;
          cfg.max_sentences = 1 + t % 4;
          for (int k = 0; k < 5; ++k) {
            const auto s = svc.suggest({"harbor", 0, 3}, t % 2 ? "m1" : "m2", cfg);
            CHECK(count_sentences(s.generated) <= static_cast<std::size_t>(cfg.max_sentences));
            ids[t].push_back(s.id);
            service::Ratings r;
            r.values = {1 + k, 2, 3, 4};
            svc.publish(s.id, "edited " + std::to_string(k), r, std::nullopt);
          }
        });
      }
      for (auto& th : threads) th.join();
      std::set<std::string> unique;
      for (const auto& v : ids) unique.insert(v.begin(), v.end());
      CHECK(unique.size() == 30);
      before = svc.dashboard().dump();
    }
    service::Service again(opts);
    CHECK(again.suggestion_count() == 30);
    CHECK(again.dashboard().dump() == before);
  }
}
