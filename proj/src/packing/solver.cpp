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
#include <set>
#include <unordered_map>

#include "packing/tableau.hpp"
#include "storyloop/error.hpp"
#include "storyloop/packing.hpp"

namespace storyloop::packing {
namespace {

using Terms = Tableau::Terms;

struct SolveModel {
  std::unordered_map<std::string, int> index;  // segment name -> column
  std::vector<const SegmentSpec*> by_column;
};

SolveModel index_segments(const std::vector<SegmentSpec>& specs) {
  SolveModel model;
  std::set<int> declared;
  for (const auto& spec : specs) {
    if (spec.available < 0) {
      throw Error(ErrorCode::kInvalidArgument,
                  "segment '" + spec.name + "' has negative available length");
    }
    if (!model.index.emplace(spec.name, static_cast<int>(model.by_column.size()))
             .second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate segment '" + spec.name + "'");
    }
    if (!declared.insert(spec.declared_index).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate declared_index " +
                      std::to_string(spec.declared_index));
    }
    model.by_column.push_back(&spec);
  }
  return model;
}

Terms row_terms(const Constraint& c, const SolveModel& model) {
  if (c.terms.empty()) {
    throw Error(ErrorCode::kInvalidArgument,
                "constraint '" + c.name + "' has no terms");
  }
  Terms terms;
  for (const auto& term : c.terms) {
    auto it = model.index.find(term.segment);
    if (it == model.index.end()) {
      throw Error(ErrorCode::kUnknownSegment,
                  "constraint '" + c.name + "' references unknown segment '" +
                      term.segment + "'");
    }
    terms.emplace_back(it->second, to_rational(term.coefficient));
  }
  return terms;
}

struct Incumbent {
  Rational objective;
  std::vector<Rational> lengths;
};

// Depth-first branch and bound on the length columns [0, n). The root is
// solved in place so the caller can keep extending it.
std::optional<Incumbent> branch_and_bound(Tableau& root, int n) {
  if (root.solve() == Tableau::Status::kInfeasible) return std::nullopt;

  auto first_fractional = [n](const Tableau& t) {
    for (int j = 0; j < n; ++j) {
      if (!is_integer(t.value(j))) return j;
    }
    return -1;
  };
  auto snapshot = [n](const Tableau& t) {
    Incumbent inc{t.objective_value(), {}};
    for (int j = 0; j < n; ++j) inc.lengths.push_back(t.value(j));
    return inc;
  };

  if (first_fractional(root) < 0) return snapshot(root);

  std::optional<Incumbent> best;
  std::vector<Tableau> stack{root};
  bool root_pending = true;
  while (!stack.empty()) {
    Tableau node = std::move(stack.back());
    stack.pop_back();
    if (!root_pending && node.solve() == Tableau::Status::kInfeasible) continue;
    root_pending = false;
    if (best && node.objective_value() >= best->objective) continue;
    const int j = first_fractional(node);
    if (j < 0) {
      best = snapshot(node);
      continue;
    }
    const Rational v = node.value(j);
    const Rational down = floor_of(v);
    Tableau up_child = node;
    up_child.set_bounds(j, Rational(down + 1), node.upper(j));
    node.set_bounds(j, node.lower(j), down);
    stack.push_back(std::move(up_child));
    stack.push_back(std::move(node));
  }
  return best;
}

}  // namespace

Allocation solve(const std::vector<SegmentSpec>& specs,
                 const std::vector<Constraint>& constraints,
                 std::int64_t budget, std::int64_t reserved) {
  if (budget < 0) {
    throw Error(ErrorCode::kInvalidArgument, "budget must be non-negative");
  }
  const SolveModel model = index_segments(specs);
  const int n = static_cast<int>(specs.size());

  Tableau tableau;
  for (const auto& spec : specs) {
    tableau.add_variable(Rational(0), Rational(spec.available));
  }

  // Error columns: one per LE/GE soft constraint, two per EQ.
  struct SoftRow {
    Terms terms;
    Relation relation;
    Rational bound;
    int level;
    std::vector<int> errors;
  };
  std::vector<SoftRow> soft;
  std::vector<std::pair<Terms, const Constraint*>> required;
  for (const auto& c : constraints) {
    Terms terms = row_terms(c, model);
    if (c.priority.is_required()) {
      required.emplace_back(std::move(terms), &c);
      continue;
    }
    SoftRow row{std::move(terms), c.relation, to_rational(c.bound),
                c.priority.level(), {}};
    row.errors.push_back(tableau.add_variable(Rational(0), std::nullopt));
    if (c.relation == Relation::kEq) {
      row.errors.push_back(tableau.add_variable(Rational(0), std::nullopt));
    }
    soft.push_back(std::move(row));
  }

  Terms all_lengths;
  for (int j = 0; j < n; ++j) all_lengths.emplace_back(j, Rational(1));
  const std::int64_t capacity = std::max<std::int64_t>(0, budget - reserved);
  tableau.add_row(all_lengths, Relation::kLe, Rational(capacity));
  for (const auto& [terms, c] : required) {
    tableau.add_row(terms, c->relation, to_rational(c->bound));
  }
  for (const auto& row : soft) {
    Terms terms = row.terms;
    switch (row.relation) {
      case Relation::kLe:  // a.l - e <= b
        terms.emplace_back(row.errors[0], Rational(-1));
        break;
      case Relation::kGe:  // a.l + e >= b
        terms.emplace_back(row.errors[0], Rational(1));
        break;
      case Relation::kEq:  // a.l - e_over + e_under == b
        terms.emplace_back(row.errors[0], Rational(-1));
        terms.emplace_back(row.errors[1], Rational(1));
        break;
    }
    tableau.add_row(terms, row.relation, row.bound);
  }

  // Objectives in lexicographic order, each minimised.
  std::vector<Terms> stages;
  std::set<int, std::greater<>> levels;
  for (const auto& row : soft) levels.insert(row.level);
  for (int level : levels) {
    Terms objective;
    for (const auto& row : soft) {
      if (row.level != level) continue;
      for (int e : row.errors) objective.emplace_back(e, Rational(1));
    }
    stages.push_back(std::move(objective));
  }
  Terms total;
  for (int j = 0; j < n; ++j) total.emplace_back(j, Rational(-1));
  stages.push_back(std::move(total));
  std::vector<int> order(n);
  for (int j = 0; j < n; ++j) order[j] = j;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return model.by_column[a]->declared_index <
           model.by_column[b]->declared_index;
  });
  for (int j : order) stages.push_back({{j, Rational(-1)}});

  std::optional<Incumbent> result;
  for (std::size_t s = 0; s < stages.size(); ++s) {
    tableau.set_objective(stages[s]);
    result = branch_and_bound(tableau, n);
    if (!result) {
      throw Error(ErrorCode::kInfeasible,
                  "required packing constraints admit no integer allocation");
    }
    // Every integer length vector is already determined once the last
    // declared segment is maximised; skip the redundant pin.
    if (s + 1 < stages.size()) {
      tableau.add_row(stages[s], Relation::kLe, result->objective);
    }
  }

  Allocation allocation;
  for (int j = 0; j < n; ++j) {
    allocation.lengths[specs[j].name] =
        static_cast<std::int64_t>(boost::multiprecision::numerator(result->lengths[j]));
  }
  return allocation;
}

std::vector<std::pair<int, double>> violations(
    const std::vector<SegmentSpec>& specs,
    const std::vector<Constraint>& constraints, const Allocation& allocation) {
  const SolveModel model = index_segments(specs);
  std::map<int, Rational, std::greater<>> per_level;
  for (const auto& c : constraints) {
    if (c.priority.is_required()) continue;
    Rational lhs = 0;
    for (const auto& term : c.terms) {
      if (!model.index.count(term.segment)) {
        throw Error(ErrorCode::kUnknownSegment,
                    "unknown segment '" + term.segment + "'");
      }
      lhs += to_rational(term.coefficient) * allocation.at(term.segment);
    }
    const Rational b = to_rational(c.bound);
    Rational v = 0;
    switch (c.relation) {
      case Relation::kLe:
        v = lhs > b ? Rational(lhs - b) : Rational(0);
        break;
      case Relation::kGe:
        v = lhs < b ? Rational(b - lhs) : Rational(0);
        break;
      case Relation::kEq:
        v = lhs > b ? Rational(lhs - b) : Rational(b - lhs);
        break;
    }
    per_level[c.priority.level()] += v;
  }
  std::vector<std::pair<int, double>> out;
  for (const auto& [level, v] : per_level) {
    out.emplace_back(level, v.convert_to<double>());
  }
  return out;
}

}  // namespace storyloop::packing
