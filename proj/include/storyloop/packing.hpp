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

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace storyloop::packing {

using TokenId = std::int32_t;
using SegmentId = std::int32_t;

enum class Trim { kHead, kTail };
enum class Relation { kLe, kGe, kEq };

std::string_view trim_name(Trim trim);
std::string_view relation_name(Relation relation);

// Exact rational coefficient. Parsed from integers, decimals ("0.25") or
// fractions ("3/4"); always stored reduced with a positive denominator.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Fraction parse(std::string_view text);
  static Fraction integer(std::int64_t v) { return {v, 1}; }
  double to_double() const { return static_cast<double>(num) / den; }
  std::string str() const;

  friend bool operator==(const Fraction&, const Fraction&) = default;
};

struct SegmentSpec {
  std::string name;
  // Policy class used to match constraints written against segment types
  // (e.g. every played card has kind "card_description"). Empty means name.
  std::string kind;
  std::vector<SegmentId> segment_ids;
  std::int64_t available = 0;
  Trim trim = Trim::kHead;
  int declared_index = 0;

  const std::string& kind_or_name() const { return kind.empty() ? name : kind; }
};

// REQUIRED, or a soft strength >= 1 where larger is stronger.
class Priority {
 public:
  static Priority required() { return Priority(0); }
  static Priority strength(int level);

  bool is_required() const { return level_ == 0; }
  int level() const { return level_; }
  std::string str() const;

  friend bool operator==(const Priority&, const Priority&) = default;

 private:
  explicit Priority(int level) : level_(level) {}
  int level_;
};

struct Term {
  std::string segment;
  Fraction coefficient = Fraction::integer(1);
};

struct Constraint {
  std::string name;
  std::vector<Term> terms;
  Relation relation = Relation::kGe;
  Fraction bound;
  Priority priority = Priority::required();
};

struct Allocation {
  std::map<std::string, std::int64_t> lengths;

  std::int64_t at(const std::string& segment) const;
  std::int64_t total() const;

  friend bool operator==(const Allocation&, const Allocation&) = default;
};

// Constraint-hierarchy allocation of a token budget. The result is the unique
// integer allocation that
//   1. satisfies every REQUIRED constraint, the boxes 0 <= len <= available
//      and sum(len) <= budget - reserved,
//   2. lexicographically minimises, strongest level first, the per-level sum
//      of absolute soft-constraint violations,
//   3. then maximises sum(len),
//   4. then lexicographically maximises lengths in declared_index order.
// Segments with available == 0 always get 0.
//
// Internally a bounded dual simplex over exact rationals solves each level,
// with branch and bound enforcing integrality; every level's optimum is then
// pinned as a new row before the next level is optimised.
//
// Throws kUnknownSegment for constraints naming undeclared segments and
// kInfeasible when the REQUIRED set has no integer solution.
Allocation solve(const std::vector<SegmentSpec>& specs,
                 const std::vector<Constraint>& constraints,
                 std::int64_t budget, std::int64_t reserved = 0);

// Per-priority-level violation sums of an allocation, strongest level first.
// Returned as doubles for reporting; the solver itself compares exactly.
std::vector<std::pair<int, double>> violations(
    const std::vector<SegmentSpec>& specs,
    const std::vector<Constraint>& constraints, const Allocation& allocation);

// ---- policy files --------------------------------------------------------

struct PolicySegment {
  std::string name;
  Trim trim = Trim::kHead;
  std::vector<std::string> segment_ids;
};

// Declarative packing policy:
//
//   budget 1024
//   reserve 0
//   segment a trim=head ids=a
//   a_min: a ge 6 @ 3
//   cap: a + 2*b le 20 @ required
//
// Constraint terms name a segment or a segment kind. A single-term constraint
// on a kind is replicated for each segment of that kind; in multi-term
// constraints a kind expands to the sum over its segments.
struct Policy {
  std::int64_t budget = 1024;
  std::int64_t reserve = 0;
  std::vector<PolicySegment> segments;
  std::vector<Constraint> constraints;

  static Policy parse(std::string_view text);
  static Policy load(const std::string& path);

  // Binds the policy's constraints to concrete segments. Constraints whose
  // terms match no segment are dropped unless `strict`, in which case they
  // raise kUnknownSegment.
  std::vector<Constraint> instantiate(const std::vector<SegmentSpec>& specs,
                                      bool strict = false) const;

  // Specs for the declared segments with the given available lengths
  // (missing entries are 0). Segment ids come from `ids` when set.
  std::vector<SegmentSpec> declared_specs(
      const std::map<std::string, std::int64_t>& available) const;

  std::int64_t effective_budget() const;
};

// The shipped generation policy (resources/policies/default.pol).
const Policy& default_policy();

// ---- composed context ----------------------------------------------------

struct PackInput {
  SegmentSpec spec;
  std::vector<TokenId> tokens;
};

struct ContextItem {
  TokenId token = 0;
  std::size_t position = 0;
  std::vector<SegmentId> segments;

  friend bool operator==(const ContextItem&, const ContextItem&) = default;
};

struct ComposedContext {
  std::vector<ContextItem> items;
  Allocation allocation;

  std::size_t size() const { return items.size(); }
};

// Solves the allocation with one reserved separator token per non-empty
// segment, then emits, in declared order, each segment's separator followed
// by its first (HEAD) or last (TAIL) allocated tokens. Every item carries
// its segment's full id set. Separators are looked up by segment name, then
// by kind.
ComposedContext pack(const std::vector<PackInput>& bundle,
                     const std::vector<Constraint>& constraints,
                     std::int64_t budget,
                     const std::map<std::string, TokenId>& separators);

// Token-level view of the same operation, used when only the trimmed token
// lists are needed (e.g. to render packed text).
std::vector<std::vector<TokenId>> trimmed_tokens(
    const std::vector<PackInput>& bundle, const Allocation& allocation);

// Growable string <-> id map for token and segment vocabularies.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(const std::vector<std::string>& words);

  std::int32_t add(const std::string& word);
  std::optional<std::int32_t> find(const std::string& word) const;
  // Throws kIdOutOfRange for unknown words.
  std::int32_t id(const std::string& word) const;
  const std::string& word(std::int32_t id) const;
  std::size_t size() const { return words_.size(); }

  std::vector<std::int32_t> encode(const std::vector<std::string>& words);

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::int32_t> index_;
};

// ---- segment embeddings ----------------------------------------------------

struct EmbeddingTables {
  Eigen::MatrixXd token;     // |V| x d
  Eigen::MatrixXd position;  // max_len x d
  Eigen::MatrixXd segment;   // |S| x d

  Eigen::Index width() const { return token.cols(); }
};

// Row i = position[pos_i] + token[tok_i] + sum over the item's segment ids of
// segment[s]. Throws kIdOutOfRange when any id is outside its table and
// kDimensionMismatch when the tables disagree on width.
Eigen::MatrixXd compose_embeddings(const ComposedContext& context,
                                   const EmbeddingTables& tables);

}  // namespace storyloop::packing
