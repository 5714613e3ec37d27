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
#include <initializer_list>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace storyloop {

// kMetric: lowercased alphanumeric runs, punctuation dropped. This is the
// preprocessing shared by USER and the ROUGE family.
// kStats: alternating alphanumeric / non-alphanumeric runs with case kept and
// whitespace-only runs dropped. Used for corpus statistics and token budgets.
enum class TokenizerMode { kMetric, kStats };

struct ByteRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const ByteRange&, const ByteRange&) = default;
};

struct TokenSequence {
  TokenSequence() = default;
  TokenSequence(std::initializer_list<std::string> init,
                TokenizerMode m = TokenizerMode::kMetric)
      : tokens(init), mode(m) {}
  explicit TokenSequence(std::vector<std::string> toks,
                         TokenizerMode m = TokenizerMode::kMetric)
      : tokens(std::move(toks)), mode(m) {}

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens[i]; }

  std::vector<std::string> tokens;
  TokenizerMode mode = TokenizerMode::kMetric;
  // Source byte range of each token; empty for hand-built sequences.
  std::vector<ByteRange> offsets;
};

struct TokenizeOptions {
  // Porter stemming of METRIC tokens. Off by default.
  bool stem = false;
};

TokenSequence tokenize(std::string_view text, TokenizerMode mode,
                       const TokenizeOptions& options = {});

// True for code points in Unicode categories L* and Nd.
bool is_alphanumeric(char32_t cp);

std::string join(const std::vector<std::string>& tokens,
                 std::string_view sep = " ");

class StopwordList {
 public:
  StopwordList() = default;
  StopwordList(const std::vector<std::string>& words, std::string version);

  // Parses the resource format: a `# version: <id>` header line followed by
  // one word per line. Blank lines and other `#` lines are skipped.
  static StopwordList parse(std::string_view text);
  static StopwordList load(const std::string& path);

  bool contains(std::string_view token) const;
  const std::string& version() const { return version_; }
  std::size_t size() const { return words_.size(); }
  const std::set<std::string, std::less<>>& words() const { return words_; }

 private:
  std::set<std::string, std::less<>> words_;
  std::string version_;
};

// The classic 179-word English list compiled into the library.
const StopwordList& default_stopwords();

bool is_stopword(std::string_view token,
                 const StopwordList& list = default_stopwords());

// Keeps at most `max_sentences` sentences. A sentence ends after a run of
// `.`, `!` or `?` that is followed by whitespace or the end of the text.
// Abbreviations such as "Mr." are not special-cased.
std::string truncate_sentences(std::string_view text, std::size_t max_sentences);

std::size_t count_sentences(std::string_view text);

// Porter (1980) suffix stripping for lowercase ASCII words; other input is
// returned unchanged.
std::string porter_stem(std::string_view word);

}  // namespace storyloop
