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

#include "storyloop/error.hpp"
#include "storyloop/packing.hpp"

namespace storyloop::packing {

std::vector<std::vector<TokenId>> trimmed_tokens(
    const std::vector<PackInput>& bundle, const Allocation& allocation) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(bundle.size());
  for (const auto& input : bundle) {
    const auto len = static_cast<std::size_t>(allocation.at(input.spec.name));
    const auto& toks = input.tokens;
    if (input.spec.trim == Trim::kHead) {
      out.emplace_back(toks.begin(), toks.begin() + len);
    } else {
      out.emplace_back(toks.end() - len, toks.end());
    }
  }
  return out;
}

ComposedContext pack(const std::vector<PackInput>& bundle,
                     const std::vector<Constraint>& constraints,
                     std::int64_t budget,
                     const std::map<std::string, TokenId>& separators) {
  std::vector<SegmentSpec> specs;
  std::int64_t separator_overhead = 0;
  for (const auto& input : bundle) {
    if (static_cast<std::int64_t>(input.tokens.size()) != input.spec.available) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segment '" + input.spec.name + "' declares " +
                      std::to_string(input.spec.available) + " tokens but has " +
                      std::to_string(input.tokens.size()));
    }
    if (input.spec.segment_ids.empty()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segment '" + input.spec.name + "' has no segment ids");
    }
    if (input.spec.available > 0) ++separator_overhead;
    specs.push_back(input.spec);
  }

  ComposedContext ctx;
  ctx.allocation = solve(specs, constraints, budget, separator_overhead);

  // Emit in declared order.
  std::vector<std::size_t> order(bundle.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return bundle[a].spec.declared_index < bundle[b].spec.declared_index;
  });
  const auto kept = trimmed_tokens(bundle, ctx.allocation);
  for (std::size_t i : order) {
    const auto& spec = bundle[i].spec;
    if (kept[i].empty()) continue;
    auto sep = separators.find(spec.name);
    if (sep == separators.end()) sep = separators.find(spec.kind_or_name());
    if (sep == separators.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "no separator token for segment '" + spec.name + "'");
    }
    auto emit = [&](TokenId token) {
      ctx.items.push_back({token, ctx.items.size(), spec.segment_ids});
    };
    emit(sep->second);
    for (TokenId t : kept[i]) emit(t);
  }
  return ctx;
}

Vocabulary::Vocabulary(const std::vector<std::string>& words) {
  for (const auto& w : words) add(w);
}

std::int32_t Vocabulary::add(const std::string& word) {
  auto [it, inserted] =
      index_.emplace(word, static_cast<std::int32_t>(words_.size()));
  if (inserted) words_.push_back(word);
  return it->second;
}

std::optional<std::int32_t> Vocabulary::find(const std::string& word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::int32_t Vocabulary::id(const std::string& word) const {
  auto found = find(word);
  if (!found) {
    throw Error(ErrorCode::kIdOutOfRange, "'" + word + "' is not in the vocabulary");
  }
  return *found;
}

const std::string& Vocabulary::word(std::int32_t id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw Error(ErrorCode::kIdOutOfRange,
                "vocabulary id " + std::to_string(id) + " out of range");
  }
  return words_[id];
}

std::vector<std::int32_t> Vocabulary::encode(
    const std::vector<std::string>& words) {
  std::vector<std::int32_t> out;
  out.reserve(words.size());
  for (const auto& w : words) out.push_back(add(w));
  return out;
}

}  // namespace storyloop::packing
