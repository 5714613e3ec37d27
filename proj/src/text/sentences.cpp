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

#include "storyloop/text.hpp"

namespace storyloop {
namespace {

bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

// Byte offsets one past each sentence-final punctuation run. Text after the
// last boundary that is not all whitespace forms one more sentence.
std::vector<std::size_t> sentence_ends(std::string_view text) {
  std::vector<std::size_t> ends;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_terminal(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_terminal(text[j])) ++j;
    if (j == text.size() || is_space(text[j])) ends.push_back(j);
    i = j;
  }
  return ends;
}

bool has_content(std::string_view text, std::size_t from) {
  for (std::size_t k = from; k < text.size(); ++k) {
    if (!is_space(text[k])) return true;
  }
  return false;
}

}  // namespace

std::string truncate_sentences(std::string_view text,
                               std::size_t max_sentences) {
  if (max_sentences == 0) max_sentences = 1;
  const auto ends = sentence_ends(text);
  if (ends.size() < max_sentences) return std::string(text);
  if (ends.size() == max_sentences &&
      !has_content(text, ends[max_sentences - 1])) {
    return std::string(text);
  }
  return std::string(text.substr(0, ends[max_sentences - 1]));
}

std::size_t count_sentences(std::string_view text) {
  const auto ends = sentence_ends(text);
  const std::size_t tail_from = ends.empty() ? 0 : ends.back();
  return ends.size() + (has_content(text, tail_from) ? 1 : 0);
}

}  // namespace storyloop
