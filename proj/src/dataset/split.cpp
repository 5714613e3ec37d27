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
#include <charconv>
#include <numeric>
#include <random>

#include "storyloop/dataset.hpp"
#include "storyloop/error.hpp"

namespace storyloop::dataset {
namespace {

using i128 = __int128;

std::array<std::size_t, 3> story_quotas(std::size_t n,
                                        const std::array<int, 3>& w) {
  const std::int64_t total = w[0] + w[1] + w[2];
  std::array<std::size_t, 3> q{};
  std::array<std::int64_t, 3> rem{};
  std::size_t assigned = 0;
  for (int k = 0; k < 3; ++k) {
    q[k] = n * static_cast<std::size_t>(w[k]) / static_cast<std::size_t>(total);
    rem[k] = static_cast<std::int64_t>(n * static_cast<std::size_t>(w[k]) %
                                       static_cast<std::size_t>(total));
    assigned += q[k];
  }
  while (assigned < n) {
    int best = 0;
    for (int k = 1; k < 3; ++k) {
      if (rem[k] > rem[best]) best = k;
    }
    ++q[best];
    rem[best] = -1;
    ++assigned;
  }
  for (int k = 0; k < 3; ++k) {
    if (q[k] > 0 || w[k] == 0) continue;
    int largest = 0;
    for (int j = 1; j < 3; ++j) {
      if (q[j] > q[largest]) largest = j;
    }
    --q[largest];
    ++q[k];
  }
  return q;
}

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

class Balancer {
 public:
  Balancer(const std::vector<std::int64_t>& tokens, const std::array<int, 3>& w)
      : tokens_(tokens), w_(w) {
    total_ = std::accumulate(tokens.begin(), tokens.end(), std::int64_t{0});
    weight_sum_ = w[0] + w[1] + w[2];
  }

  // Sum over splits of |W * t_k - w_k * T|; zero means exact proportions.
  i128 cost(const std::array<std::int64_t, 3>& t) const {
    i128 c = 0;
    for (int k = 0; k < 3; ++k) {
      i128 d = static_cast<i128>(weight_sum_) * t[k] -
               static_cast<i128>(w_[k]) * total_;
      c += d < 0 ? -d : d;
    }
    return c;
  }

  std::vector<int> greedy(const std::vector<std::size_t>& order,
                          const std::array<std::size_t, 3>& quota,
                          std::array<std::int64_t, 3>& t) const {
    std::vector<int> split(tokens_.size(), 0);
    std::array<std::size_t, 3> used{};
    t = {};
    for (std::size_t i : order) {
      const std::int64_t tok = tokens_[i];
      int best = -1;
      bool best_fits = false;
      for (int k = 0; k < 3; ++k) {
        if (used[k] >= quota[k]) continue;
        const bool fits = static_cast<i128>(weight_sum_) * (t[k] + tok) <=
                          static_cast<i128>(w_[k]) * total_;
        if (best < 0 || (fits && !best_fits) ||
            (fits == best_fits && better(k, best, fits, t, quota, used))) {
          best = k;
          best_fits = fits;
        }
      }
      split[i] = best;
      ++used[best];
      t[best] += tok;
    }
    return split;
  }

  // Best-improvement exchanges of one story (and, for small corpora, two
  // stories) between splits until no exchange lowers the cost.
  void polish(std::vector<int>& split, std::array<std::int64_t, 3>& t) const {
    const std::size_t n = tokens_.size();
    const bool pairs = n <= 400;
    while (true) {
      i128 best_cost = cost(t);
      std::array<std::size_t, 2> move_a{kNone, kNone}, move_b{kNone, kNone};
      int from_a = 0, from_b = 0;
      std::array<std::int64_t, 3> best_t = t;
      for (int ka = 0; ka < 3; ++ka) {
        for (int kb = ka + 1; kb < 3; ++kb) {
          std::vector<std::size_t> a, b;
          for (std::size_t i = 0; i < n; ++i) {
            if (split[i] == ka) a.push_back(i);
            if (split[i] == kb) b.push_back(i);
          }
          auto consider = [&](std::int64_t sum_a, std::int64_t sum_b,
                              std::array<std::size_t, 2> ga,
                              std::array<std::size_t, 2> gb) {
            std::array<std::int64_t, 3> t2 = t;
            t2[ka] += sum_b - sum_a;
            t2[kb] += sum_a - sum_b;
            const i128 c = cost(t2);
            if (c < best_cost) {
              best_cost = c;
              best_t = t2;
              move_a = ga;
              move_b = gb;
              from_a = ka;
              from_b = kb;
            }
          };
          for (std::size_t x : a) {
            for (std::size_t y : b) {
              consider(tokens_[x], tokens_[y], {x, kNone}, {y, kNone});
            }
          }
          if (!pairs) continue;
          for (std::size_t x1 = 0; x1 < a.size(); ++x1) {
            for (std::size_t x2 = x1 + 1; x2 < a.size(); ++x2) {
              const std::int64_t sa = tokens_[a[x1]] + tokens_[a[x2]];
              for (std::size_t y1 = 0; y1 < b.size(); ++y1) {
                for (std::size_t y2 = y1 + 1; y2 < b.size(); ++y2) {
                  const std::int64_t sb = tokens_[b[y1]] + tokens_[b[y2]];
                  if (sa == sb) continue;
                  consider(sa, sb, {a[x1], a[x2]}, {b[y1], b[y2]});
                }
              }
            }
          }
        }
      }
      if (move_a[0] == kNone) return;
      for (std::size_t i : move_a) {
        if (i != kNone) split[i] = from_b;
      }
      for (std::size_t i : move_b) {
        if (i != kNone) split[i] = from_a;
      }
      t = best_t;
    }
  }

 private:
  // Compares remaining token deficits. Among fitting splits the deficit is
  // spread over the split's free slots; otherwise the raw deficit decides.
  // Equal values keep the lower split index.
  bool better(int k, int best, bool fits, const std::array<std::int64_t, 3>& t,
              const std::array<std::size_t, 3>& quota,
              const std::array<std::size_t, 3>& used) const {
    auto deficit = [&](int j) {
      return static_cast<i128>(w_[j]) * total_ -
             static_cast<i128>(weight_sum_) * t[j];
    };
    if (fits) {
      const i128 free_k = static_cast<i128>(quota[k] - used[k]);
      const i128 free_b = static_cast<i128>(quota[best] - used[best]);
      return deficit(k) * free_b > deficit(best) * free_k;
    }
    return deficit(k) > deficit(best);
  }

  const std::vector<std::int64_t>& tokens_;
  std::array<int, 3> w_;
  std::int64_t total_ = 0;
  std::int64_t weight_sum_ = 0;
};

}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kValid: return "valid";
    case Split::kTest: return "test";
  }
  return "train";
}

SplitRatios SplitRatios::parse(std::string_view text) {
  SplitRatios r;
  std::size_t pos = 0;
  for (int k = 0; k < 3; ++k) {
    const std::size_t end = k < 2 ? text.find(':', pos) : text.size();
    if (end == std::string_view::npos) {
      throw Error(ErrorCode::kParseError, "ratios must look like 8:1:1");
    }
    const std::string_view part = text.substr(pos, end - pos);
    int v = 0;
    auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
    if (ec != std::errc() || ptr != part.data() + part.size() || v < 1) {
      throw Error(ErrorCode::kParseError,
                  "bad ratio component '" + std::string(part) + "'");
    }
    r.weights[k] = v;
    pos = end + 1;
  }
  return r;
}

std::int64_t story_tokens(const Story& story) {
  std::int64_t n = 0;
  for (const Scene& scene : story.scenes) {
    for (const Entry& e : scene.entries) n += stats_token_count(e.text);
  }
  return n;
}

SplitAssignment split_weights(
    const std::vector<std::pair<std::string, std::int64_t>>& weights,
    const SplitRatios& ratios, std::uint64_t seed) {
  const std::size_t n = weights.size();
  if (n < 3) {
    throw Error(ErrorCode::kTooFewStories,
                "need at least 3 stories, got " + std::to_string(n));
  }
  for (int w : ratios.weights) {
    if (w < 0) throw Error(ErrorCode::kInvalidArgument, "negative ratio");
  }
  std::vector<std::int64_t> tokens(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i].second < 0) {
      throw Error(ErrorCode::kInvalidArgument, "negative token count");
    }
    tokens[i] = weights[i].second;
  }

  // Largest first; the seed permutes runs of equal size only.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return tokens[a] > tokens[b];
  });
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && tokens[order[j]] == tokens[order[i]]) ++j;
    std::shuffle(order.begin() + static_cast<std::ptrdiff_t>(i),
                 order.begin() + static_cast<std::ptrdiff_t>(j), rng);
    i = j;
  }

  const auto quota = story_quotas(n, ratios.weights);
  Balancer balancer(tokens, ratios.weights);
  std::array<std::int64_t, 3> t{};
  std::vector<int> split = balancer.greedy(order, quota, t);
  balancer.polish(split, t);

  SplitAssignment out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = static_cast<Split>(split[i]);
    if (!out.assignment.emplace(weights[i].first, s).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate story id " + weights[i].first);
    }
    ++out.stories[split[i]];
    out.tokens[split[i]] += tokens[i];
  }
  const std::int64_t total = t[0] + t[1] + t[2];
  for (int k = 0; k < 3; ++k) {
    out.story_ratio[k] = static_cast<double>(out.stories[k]) / static_cast<double>(n);
    out.token_ratio[k] =
        total > 0 ? static_cast<double>(out.tokens[k]) / static_cast<double>(total)
                  : 0.0;
  }
  return out;
}

SplitAssignment split_corpus(const std::vector<Story>& corpus,
                             const SplitRatios& ratios, std::uint64_t seed) {
  std::vector<std::pair<std::string, std::int64_t>> weights;
  weights.reserve(corpus.size());
  for (const Story& s : corpus) weights.emplace_back(s.id, story_tokens(s));
  return split_weights(weights, ratios, seed);
}

nlohmann::json to_json(const SplitAssignment& split) {
  nlohmann::json doc;
  nlohmann::json assignment = nlohmann::json::object();
  for (const auto& [id, s] : split.assignment) {
    assignment[id] = std::string(split_name(s));
  }
  doc["assignment"] = std::move(assignment);
  for (int k = 0; k < 3; ++k) {
    const std::string name(split_name(static_cast<Split>(k)));
    doc["stories"][name] = split.stories[k];
    doc["tokens"][name] = split.tokens[k];
    doc["story_ratio"][name] = split.story_ratio[k];
    doc["token_ratio"][name] = split.token_ratio[k];
  }
  return doc;
}

}  // namespace storyloop::dataset
