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

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "storyloop/text.hpp"

namespace storyloop {

// A contiguous run of `length` tokens shared by the generated sequence x
// (starting at start_x) and the reference y (starting at start_y).
struct MatchSpan {
  std::size_t start_x = 0;
  std::size_t start_y = 0;
  std::size_t length = 0;
  // True when the run holds at least one non-stopword.
  bool counted = false;

  friend bool operator==(const MatchSpan&, const MatchSpan&) = default;
};

struct EditMetricReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t matched_tokens = 0;
  std::vector<MatchSpan> spans;

  friend bool operator==(const EditMetricReport&,
                         const EditMetricReport&) = default;
};

double f1_score(double precision, double recall);

// Longest common contiguous run. Ties go to the smallest start_x, then the
// smallest start_y. Returns nullopt when the sequences share no token.
std::optional<MatchSpan> longest_common_substring(const TokenSequence& x,
                                                  const TokenSequence& y);

// Pivot recursion: take the longest common run as a pivot, then recurse on
// the tokens strictly left of it in both sequences and strictly right of it.
// Stopwords do not influence pivot choice; they only decide `counted`.
// Spans come back ordered by start_x (and therefore by start_y).
std::vector<MatchSpan> user_matches(
    const TokenSequence& x, const TokenSequence& y,
    const StopwordList& stopwords = default_stopwords());

struct UserOptions {
  // Strip stopwords from both sides before matching instead of only at
  // counting time. Span indices then refer to the filtered sequences.
  bool remove_stopwords_first = false;
};

// USER(x, y): precision = matched/|x|, recall = matched/|y|, where matched
// counts tokens inside counted spans. x is the generated text, y the
// published text. Throws kEmptyInput when either side is empty.
EditMetricReport user_score(const TokenSequence& x, const TokenSequence& y,
                            const StopwordList& stopwords = default_stopwords(),
                            const UserOptions& options = {});

std::size_t lcs_length(const TokenSequence& x, const TokenSequence& y);

EditMetricReport rouge_l(const TokenSequence& x, const TokenSequence& y,
                         bool remove_stopwords = false,
                         const StopwordList& stopwords = default_stopwords());

inline constexpr double kDefaultRougeWAlpha = 1.2;

// Weighted LCS with f(k) = k^alpha. The report's matched_tokens holds the
// plain LCS length of the weighted alignment.
double weighted_lcs(const TokenSequence& x, const TokenSequence& y,
                    double alpha);

EditMetricReport rouge_w(const TokenSequence& x, const TokenSequence& y,
                         double alpha = kDefaultRougeWAlpha,
                         bool remove_stopwords = false,
                         const StopwordList& stopwords = default_stopwords());

TokenSequence remove_stopwords(const TokenSequence& seq,
                               const StopwordList& stopwords);

// Scores a generated/published text pair the way the service and CLI do.
struct PairScores {
  EditMetricReport user;
  EditMetricReport rouge_l;
  EditMetricReport rouge_w;
};

struct ScoringOptions {
  double alpha = kDefaultRougeWAlpha;
  bool rouge_remove_stopwords = false;
  UserOptions user;
  TokenizeOptions tokenize;
};

PairScores score_pair(std::string_view generated, std::string_view published,
                      const StopwordList& stopwords = default_stopwords(),
                      const ScoringOptions& options = {});

// Character-level rendering of the USER alignment for editors: MATCHED text
// is shared verbatim, DELETED appears only in the generated text and ADDED
// only in the edited text. Concatenating MATCHED+DELETED segments in order
// reproduces the generated text; MATCHED+ADDED reproduces the edited text.
enum class DiffClass { kMatched, kAdded, kDeleted };

struct DiffSegment {
  std::string text;
  DiffClass kind = DiffClass::kMatched;

  friend bool operator==(const DiffSegment&, const DiffSegment&) = default;
};

std::string_view diff_class_name(DiffClass kind);

std::vector<DiffSegment> diff_segments(
    std::string_view generated, std::string_view edited,
    const StopwordList& stopwords = default_stopwords());

// ---- agreement and correlation ------------------------------------------

struct Correlation {
  double r = 0.0;
  std::size_t n = 0;
};

// Sample Pearson correlation. Throws kDegenerateInput for fewer than two
// points or a constant series, kInvalidArgument for a length mismatch.
Correlation pearson_r(const std::vector<double>& a, const std::vector<double>& b);

// rows[i][j] = number of raters putting item i into category j.
class RatingsMatrix {
 public:
  explicit RatingsMatrix(std::vector<std::vector<int>> rows);

  const std::vector<std::vector<int>>& rows() const { return rows_; }
  std::size_t items() const { return rows_.size(); }
  std::size_t categories() const { return rows_.empty() ? 0 : rows_[0].size(); }
  int raters() const { return raters_; }

  // Builds the count matrix from per-item rater labels in [first, last].
  static RatingsMatrix from_labels(const std::vector<std::vector<int>>& labels,
                                   int first, int last);

 private:
  std::vector<std::vector<int>> rows_;
  int raters_ = 0;
};

// Fleiss' kappa. When every rating falls in a single category the chance
// agreement is 1 and so is the observed agreement; 1.0 is returned.
double fleiss_kappa(const RatingsMatrix& m);

}  // namespace storyloop
