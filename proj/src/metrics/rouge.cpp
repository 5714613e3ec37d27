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

#include <cmath>

#include "storyloop/error.hpp"
#include "storyloop/metrics.hpp"

namespace storyloop {
namespace {

void require_nonempty(const TokenSequence& x, const TokenSequence& y) {
  if (x.empty() || y.empty()) {
    throw Error(ErrorCode::kEmptyInput,
                x.empty() ? "generated text has no tokens"
                          : "reference text has no tokens");
  }
}

struct WeightedLcs {
  double score = 0.0;
  std::size_t length = 0;
};

// Lin (2004) weighted LCS: c holds the weighted score, w the length of the
// consecutive run ending at (i, j).
WeightedLcs weighted_lcs_table(const std::vector<std::string>& x,
                               const std::vector<std::string>& y,
                               double alpha) {
  const std::size_t n = x.size();
  const std::size_t m = y.size();
  auto f = [alpha](double k) { return std::pow(k, alpha); };
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(m + 1, 0.0));
  std::vector<std::vector<std::size_t>> w(n + 1,
                                          std::vector<std::size_t>(m + 1, 0));
  std::vector<std::vector<std::size_t>> len(
      n + 1, std::vector<std::size_t>(m + 1, 0));
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      if (x[i - 1] == y[j - 1]) {
        const std::size_t k = w[i - 1][j - 1];
        c[i][j] = c[i - 1][j - 1] + f(static_cast<double>(k + 1)) -
                  f(static_cast<double>(k));
        w[i][j] = k + 1;
        len[i][j] = len[i - 1][j - 1] + 1;
      } else if (c[i - 1][j] > c[i][j - 1]) {
        c[i][j] = c[i - 1][j];
        len[i][j] = len[i - 1][j];
      } else {
        c[i][j] = c[i][j - 1];
        len[i][j] = len[i][j - 1];
      }
    }
  }
  return {c[n][m], len[n][m]};
}

}  // namespace

std::size_t lcs_length(const TokenSequence& x, const TokenSequence& y) {
  const std::size_t m = y.size();
  std::vector<std::size_t> prev(m + 1, 0);
  std::vector<std::size_t> cur(m + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      cur[j] = x.tokens[i - 1] == y.tokens[j - 1]
                   ? prev[j - 1] + 1
                   : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

EditMetricReport rouge_l(const TokenSequence& x, const TokenSequence& y,
                         bool remove_stops, const StopwordList& stopwords) {
  if (remove_stops) {
    return rouge_l(remove_stopwords(x, stopwords),
                   remove_stopwords(y, stopwords), false, stopwords);
  }
  require_nonempty(x, y);
  EditMetricReport report;
  report.matched_tokens = lcs_length(x, y);
  const auto lcs = static_cast<double>(report.matched_tokens);
  report.precision = lcs / static_cast<double>(x.size());
  report.recall = lcs / static_cast<double>(y.size());
  report.f1 = f1_score(report.precision, report.recall);
  return report;
}

double weighted_lcs(const TokenSequence& x, const TokenSequence& y,
                    double alpha) {
  return weighted_lcs_table(x.tokens, y.tokens, alpha).score;
}

EditMetricReport rouge_w(const TokenSequence& x, const TokenSequence& y,
                         double alpha, bool remove_stops,
                         const StopwordList& stopwords) {
  if (!(alpha > 1.0) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::kInvalidAlpha, "ROUGE-W alpha must exceed 1");
  }
  if (remove_stops) {
    return rouge_w(remove_stopwords(x, stopwords),
                   remove_stopwords(y, stopwords), alpha, false, stopwords);
  }
  require_nonempty(x, y);
  const auto table = weighted_lcs_table(x.tokens, y.tokens, alpha);
  auto f = [alpha](double k) { return std::pow(k, alpha); };
  auto f_inv = [alpha](double v) { return std::pow(v, 1.0 / alpha); };
  EditMetricReport report;
  report.matched_tokens = table.length;
  report.precision = f_inv(table.score / f(static_cast<double>(x.size())));
  report.recall = f_inv(table.score / f(static_cast<double>(y.size())));
  report.f1 = f1_score(report.precision, report.recall);
  return report;
}

}  // namespace storyloop
