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

#include <boost/multiprecision/gmp.hpp>

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "storyloop/packing.hpp"

namespace storyloop::packing {

using Rational = boost::multiprecision::mpq_rational;

Rational to_rational(const Fraction& f);
Rational floor_of(const Rational& q);
bool is_integer(const Rational& q);

// Dense bounded-variable simplex tableau over exact rationals.
//
// Every row is an equality  sum_j a_j x_j + s = rhs  whose slack s encodes the
// relation (LE: s >= 0, GE: s <= 0, EQ: s == 0). Nonbasic variables sit at a
// finite bound. The tableau is kept in canonical form for the current basis,
// so rows can be appended at any time (e.g. to pin an optimised objective)
// and bounds tightened in place (branching); a dual simplex pass then
// restores primal feasibility from the still dual-feasible basis.
class Tableau {
 public:
  enum class Status { kOptimal, kInfeasible };

  using Terms = std::vector<std::pair<int, Rational>>;

  // Structural variables must all be added before the first row.
  int add_variable(Rational lower, std::optional<Rational> upper);
  void add_row(const Terms& terms, Relation relation, const Rational& rhs);

  void set_bounds(int var, std::optional<Rational> lower,
                  std::optional<Rational> upper);
  std::optional<Rational> lower(int var) const { return lo_[var]; }
  std::optional<Rational> upper(int var) const { return up_[var]; }

  // Minimise sum(coef * x) over the structural variables.
  void set_objective(const Terms& terms);

  // Dual simplex to feasibility (from a dual-feasible basis, or with a zero
  // objective when the basis is not dual feasible), then primal simplex to
  // optimality. Bland's rule on both sides.
  Status solve();

  Rational value(int var) const;
  Rational objective_value() const;
  int structural_count() const { return structural_; }
  int rows() const { return static_cast<int>(basis_.size()); }

 private:
  int columns() const { return static_cast<int>(lo_.size()); }
  bool is_fixed(int j) const;
  Rational nonbasic_value(int j) const;
  void refresh_values();
  void refresh_reduced_costs();
  bool dual_feasible() const;
  void pivot(int row, int col);
  Status dual_simplex();
  void primal_simplex();

  int structural_ = 0;
  std::vector<std::vector<Rational>> a_;  // rows x columns, canonical form
  std::vector<Rational> rhs_;
  std::vector<int> basis_;               // basic column per row
  std::vector<int> basic_row_;           // row per column, -1 when nonbasic
  std::vector<std::optional<Rational>> lo_;
  std::vector<std::optional<Rational>> up_;
  std::vector<bool> at_upper_;           // nonbasic position
  std::vector<Rational> cost_;
  std::vector<Rational> x_;              // current values, all columns
  std::vector<Rational> d_;              // reduced costs
};

}  // namespace storyloop::packing
