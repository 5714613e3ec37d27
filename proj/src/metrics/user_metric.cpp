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
#include <utility>

#include "storyloop/error.hpp"
#include "storyloop/metrics.hpp"

namespace storyloop {
namespace {

struct Window {
  std::size_t x_lo, x_hi, y_lo, y_hi;
};

// Longest common run inside the window. Scanning start_x ascending and only
// replacing on a strictly longer run keeps the earliest start_x; within one
// row of the table the earliest start_y wins the same way.
std::optional<MatchSpan> longest_in_window(const std::vector<std::string>& x,
                                           const std::vector<std::string>& y,
                                           const Window& w) {
  const std::size_t cols = w.y_hi - w.y_lo;
  if (w.x_hi <= w.x_lo || cols == 0) return std::nullopt;
  // run[j] = length of the common run ending at (i, w.y_lo + j).
  std::vector<std::size_t> prev(cols + 1, 0);
  std::vector<std::size_t> cur(cols + 1, 0);
  std::optional<MatchSpan> best;
  for (std::size_t i = w.x_lo; i < w.x_hi; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      if (x[i] == y[w.y_lo + j]) {
        cur[j + 1] = prev[j] + 1;
        const std::size_t len = cur[j + 1];
        const std::size_t sx = i + 1 - len;
        const std::size_t sy = w.y_lo + j + 1 - len;
        if (!best || len > best->length ||
            (len == best->length &&
             (sx < best->start_x ||
              (sx == best->start_x && sy < best->start_y)))) {
          best = MatchSpan{sx, sy, len, false};
        }
      } else {
        cur[j + 1] = 0;
      }
    }
    std::swap(prev, cur);
  }
  return best;
}

}  // namespace

double f1_score(double precision, double recall) {
  const double denom = precision + recall;
  return denom > 0.0 ? 2.0 * precision * recall / denom : 0.0;
}

std::optional<MatchSpan> longest_common_substring(const TokenSequence& x,
                                                  const TokenSequence& y) {
  return longest_in_window(x.tokens, y.tokens, {0, x.size(), 0, y.size()});
}

std::vector<MatchSpan> user_matches(const TokenSequence& x,
                                    const TokenSequence& y,
                                    const StopwordList& stopwords) {
  std::vector<MatchSpan> spans;
  std::vector<Window> pending{{0, x.size(), 0, y.size()}};
  while (!pending.empty()) {
    const Window w = pending.back();
    pending.pop_back();
    auto pivot = longest_in_window(x.tokens, y.tokens, w);
    if (!pivot) continue;
    for (std::size_t k = 0; k < pivot->length; ++k) {
      if (!stopwords.contains(x.tokens[pivot->start_x + k])) {
        pivot->counted = true;
        break;
      }
    }
    spans.push_back(*pivot);
    pending.push_back({w.x_lo, pivot->start_x, w.y_lo, pivot->start_y});
    pending.push_back({pivot->start_x + pivot->length, w.x_hi,
                       pivot->start_y + pivot->length, w.y_hi});
  }
  std::sort(spans.begin(), spans.end(),
            [](const MatchSpan& a, const MatchSpan& b) {
              return a.start_x < b.start_x;
            });
  return spans;
}

TokenSequence remove_stopwords(const TokenSequence& seq,
                               const StopwordList& stopwords) {
  TokenSequence out;
  out.mode = seq.mode;
  const bool has_offsets = seq.offsets.size() == seq.tokens.size();
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (stopwords.contains(seq.tokens[i])) continue;
    out.tokens.push_back(seq.tokens[i]);
    if (has_offsets) out.offsets.push_back(seq.offsets[i]);
  }
  return out;
}

EditMetricReport user_score(const TokenSequence& x, const TokenSequence& y,
                            const StopwordList& stopwords,
                            const UserOptions& options) {
  if (options.remove_stopwords_first) {
    UserOptions plain;
    return user_score(remove_stopwords(x, stopwords),
                      remove_stopwords(y, stopwords), stopwords, plain);
  }
  if (x.empty() || y.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                x.empty() ? "generated text has no tokens"
                          : "published text has no tokens");
  }
  EditMetricReport report;
  report.spans = user_matches(x, y, stopwords);
  for (const auto& span : report.spans) {
    if (span.counted) report.matched_tokens += span.length;
  }
  const auto matched = static_cast<double>(report.matched_tokens);
  report.precision = matched / static_cast<double>(x.size());
  report.recall = matched / static_cast<double>(y.size());
  report.f1 = f1_score(report.precision, report.recall);
  return report;
}

PairScores score_pair(std::string_view generated, std::string_view published,
                      const StopwordList& stopwords,
                      const ScoringOptions& options) {
  const auto x = tokenize(generated, TokenizerMode::kMetric, options.tokenize);
  const auto y = tokenize(published, TokenizerMode::kMetric, options.tokenize);
  PairScores scores;
  scores.user = user_score(x, y, stopwords, options.user);
  scores.rouge_l = rouge_l(x, y, options.rouge_remove_stopwords, stopwords);
  scores.rouge_w = rouge_w(x, y, options.alpha, options.rouge_remove_stopwords,
                           stopwords);
  return scores;
}

}  // namespace storyloop
