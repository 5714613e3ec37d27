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

#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include <cstdint>

#include "storyloop/text.hpp"

namespace storyloop {
namespace {

enum class CharClass { kAlnum, kSpace, kOther };

struct CodePoint {
  char32_t value;
  std::size_t begin;
  std::size_t end;
};

// Decodes UTF-8; malformed sequences decode to U+FFFD and are never
// alphanumeric.
std::vector<CodePoint> decode(std::string_view text) {
  std::vector<CodePoint> out;
  out.reserve(text.size());
  const auto* s = reinterpret_cast<const uint8_t*>(text.data());
  const int32_t length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    const int32_t start = i;
    UChar32 c = 0;
    U8_NEXT(s, i, length, c);
    if (c < 0) c = 0xFFFD;
    out.push_back({static_cast<char32_t>(c), static_cast<std::size_t>(start),
                   static_cast<std::size_t>(i)});
  }
  return out;
}

CharClass classify(char32_t cp) {
  if (is_alphanumeric(cp)) return CharClass::kAlnum;
  if (u_isUWhiteSpace(static_cast<UChar32>(cp))) return CharClass::kSpace;
  return CharClass::kOther;
}

void append_utf8(std::string& out, char32_t cp) {
  uint8_t buf[U8_MAX_LENGTH];
  int32_t n = 0;
  UBool error = false;
  U8_APPEND(buf, n, U8_MAX_LENGTH, static_cast<UChar32>(cp), error);
  if (!error) out.append(reinterpret_cast<const char*>(buf), n);
}

}  // namespace

bool is_alphanumeric(char32_t cp) {
  const uint32_t mask = U_GET_GC_MASK(static_cast<UChar32>(cp));
  return (mask & (U_GC_L_MASK | U_GC_ND_MASK)) != 0;
}

TokenSequence tokenize(std::string_view text, TokenizerMode mode,
                       const TokenizeOptions& options) {
  TokenSequence seq;
  seq.mode = mode;
  const auto cps = decode(text);

  std::size_t i = 0;
  while (i < cps.size()) {
    const CharClass cls = classify(cps[i].value);
    if (mode == TokenizerMode::kMetric) {
      if (cls != CharClass::kAlnum) {
        ++i;
        continue;
      }
      std::string token;
      const std::size_t begin = cps[i].begin;
      while (i < cps.size() && classify(cps[i].value) == CharClass::kAlnum) {
        append_utf8(token, static_cast<char32_t>(
                               u_tolower(static_cast<UChar32>(cps[i].value))));
        ++i;
      }
      if (options.stem) token = porter_stem(token);
      seq.tokens.push_back(std::move(token));
      seq.offsets.push_back({begin, cps[i - 1].end});
      continue;
    }

    // STATS: whitespace and punctuation share the non-alphanumeric class, so
    // a run like ", " is one token. Whitespace-only runs are dropped and the
    // surviving runs are trimmed of surrounding whitespace.
    const bool alnum = cls == CharClass::kAlnum;
    const std::size_t run_begin = i;
    while (i < cps.size() &&
           (classify(cps[i].value) == CharClass::kAlnum) == alnum) {
      ++i;
    }
    std::size_t lo = run_begin;
    std::size_t hi = i;
    if (!alnum) {
      while (lo < hi && classify(cps[lo].value) == CharClass::kSpace) ++lo;
      while (hi > lo && classify(cps[hi - 1].value) == CharClass::kSpace) --hi;
      if (lo == hi) continue;
    }
    const std::size_t b = cps[lo].begin;
    const std::size_t e = cps[hi - 1].end;
    seq.tokens.emplace_back(text.substr(b, e - b));
    seq.offsets.push_back({b, e});
  }
  return seq;
}

std::string join(const std::vector<std::string>& tokens, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.append(sep);
    out.append(tokens[i]);
  }
  return out;
}

}  // namespace storyloop
