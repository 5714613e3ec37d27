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

#include "packing/tableau.hpp"

#include <string>

#include "storyloop/error.hpp"

namespace storyloop::packing {
namespace {

constexpr int kMaxIterations = 200000;

void iteration_guard(int& count) {
  if (++count > kMaxIterations) {
    throw Error(ErrorCode::kInternal, "simplex iteration limit exceeded");
  }
}

}  // namespace

Rational to_rational(const Fraction& f) { return Rational(f.num, f.den); }

Rational floor_of(const Rational& q) {
  using boost::multiprecision::mpz_int;
  const mpz_int n = boost::multiprecision::numerator(q);
  const mpz_int d = boost::multiprecision::denominator(q);
  mpz_int quotient = n / d;  // truncates toward zero
  if (n < 0 && quotient * d != n) quotient -= 1;
  return Rational(quotient);
}

bool is_integer(const Rational& q) {
  return boost::multiprecision::denominator(q) == 1;
}

int Tableau::add_variable(Rational lower, std::optional<Rational> upper) {
  if (!basis_.empty()) {
    throw Error(ErrorCode::kInternal, "variables must precede rows");
  }
  lo_.emplace_back(std::move(lower));
  up_.push_back(std::move(upper));
  at_upper_.push_back(false);
  basic_row_.push_back(-1);
  cost_.emplace_back(0);
  x_.push_back(*lo_.back());
  d_.emplace_back(0);
  return structural_++;
}

void Tableau::add_row(const Terms& terms, Relation relation,
                      const Rational& rhs) {
  const int slack = columns();
  for (auto& row : a_) row.emplace_back(0);
  switch (relation) {
    case Relation::kLe:
      lo_.emplace_back(Rational(0));
      up_.emplace_back(std::nullopt);
      break;
    case Relation::kGe:
      lo_.emplace_back(std::nullopt);
      up_.emplace_back(Rational(0));
      break;
    case Relation::kEq:
      lo_.emplace_back(Rational(0));
      up_.emplace_back(Rational(0));
      break;
  }
  at_upper_.push_back(false);
  basic_row_.push_back(-1);
  cost_.emplace_back(0);
  x_.emplace_back(0);
  d_.emplace_back(0);

  std::vector<Rational> row(columns(), Rational(0));
  for (const auto& [var, coef] : terms) row[var] += coef;
  row[slack] = 1;
  Rational b = rhs;
  // Express the new row in terms of the current nonbasic variables.
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    const Rational factor = row[basis_[i]];
    if (factor == 0) continue;
    for (int j = 0; j < columns(); ++j) {
      if (a_[i][j] != 0) row[j] -= factor * a_[i][j];
    }
    b -= factor * rhs_[i];
  }
  a_.push_back(std::move(row));
  rhs_.push_back(std::move(b));
  basis_.push_back(slack);
  basic_row_[slack] = static_cast<int>(basis_.size()) - 1;
  refresh_values();
}

void Tableau::set_bounds(int var, std::optional<Rational> lower,
                         std::optional<Rational> upper) {
  lo_[var] = std::move(lower);
  up_[var] = std::move(upper);
  if (basic_row_[var] < 0) {
    if (at_upper_[var] && !up_[var]) at_upper_[var] = false;
    if (!at_upper_[var] && !lo_[var]) at_upper_[var] = true;
  }
  refresh_values();
}

void Tableau::set_objective(const Terms& terms) {
  for (auto& c : cost_) c = 0;
  for (const auto& [var, coef] : terms) cost_[var] += coef;
}

bool Tableau::is_fixed(int j) const {
  return lo_[j] && up_[j] && *lo_[j] == *up_[j];
}

Rational Tableau::nonbasic_value(int j) const {
  return at_upper_[j] ? *up_[j] : *lo_[j];
}

void Tableau::refresh_values() {
  for (int j = 0; j < columns(); ++j) {
    if (basic_row_[j] < 0) x_[j] = nonbasic_value(j);
  }
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    Rational v = rhs_[i];
    for (int j = 0; j < columns(); ++j) {
      if (basic_row_[j] < 0 && a_[i][j] != 0 && x_[j] != 0) {
        v -= a_[i][j] * x_[j];
      }
    }
    x_[basis_[i]] = std::move(v);
  }
}

void Tableau::refresh_reduced_costs() {
  for (int j = 0; j < columns(); ++j) {
    if (basic_row_[j] >= 0) {
      d_[j] = 0;
      continue;
    }
    Rational v = cost_[j];
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const Rational& cb = cost_[basis_[i]];
      if (cb != 0 && a_[i][j] != 0) v -= cb * a_[i][j];
    }
    d_[j] = std::move(v);
  }
}

bool Tableau::dual_feasible() const {
  for (int j = 0; j < columns(); ++j) {
    if (basic_row_[j] >= 0 || is_fixed(j)) continue;
    if (at_upper_[j] ? d_[j] > 0 : d_[j] < 0) return false;
  }
  return true;
}

void Tableau::pivot(int row, int col) {
  const Rational p = a_[row][col];
  for (auto& v : a_[row]) {
    if (v != 0) v /= p;
  }
  rhs_[row] /= p;
  for (std::size_t i = 0; i < a_.size(); ++i) {
    if (static_cast<int>(i) == row) continue;
    const Rational factor = a_[i][col];
    if (factor == 0) continue;
    for (int j = 0; j < columns(); ++j) {
      if (a_[row][j] != 0) a_[i][j] -= factor * a_[row][j];
    }
    rhs_[i] -= factor * rhs_[row];
  }
  basic_row_[basis_[row]] = -1;
  basis_[row] = col;
  basic_row_[col] = row;
}

Tableau::Status Tableau::dual_simplex() {
  int iterations = 0;
  while (true) {
    iteration_guard(iterations);
    refresh_values();
    refresh_reduced_costs();

    // Leaving variable: smallest column index among infeasible basics.
    int row = -1;
    int leaving = columns();
    bool below = false;
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const int b = basis_[i];
      const bool lo_bad = lo_[b] && x_[b] < *lo_[b];
      const bool up_bad = up_[b] && x_[b] > *up_[b];
      if ((lo_bad || up_bad) && b < leaving) {
        leaving = b;
        row = static_cast<int>(i);
        below = lo_bad;
      }
    }
    if (row < 0) return Status::kOptimal;

    // Entering variable: minimum |d_j / a_rj| over columns that move the
    // leaving variable toward its violated bound.
    int entering = -1;
    Rational best_ratio;
    for (int j = 0; j < columns(); ++j) {
      if (basic_row_[j] >= 0 || is_fixed(j)) continue;
      const Rational& alpha = a_[row][j];
      if (alpha == 0) continue;
      const bool ok = below ? (alpha > 0 ? at_upper_[j] : !at_upper_[j])
                            : (alpha > 0 ? !at_upper_[j] : at_upper_[j]);
      if (!ok) continue;
      Rational ratio = abs(d_[j] / alpha);
      if (entering < 0 || ratio < best_ratio) {
        entering = j;
        best_ratio = std::move(ratio);
      }
    }
    if (entering < 0) return Status::kInfeasible;
    pivot(row, entering);
    at_upper_[leaving] = !below;
  }
}

void Tableau::primal_simplex() {
  int iterations = 0;
  while (true) {
    iteration_guard(iterations);
    refresh_values();
    refresh_reduced_costs();

    int entering = -1;
    int direction = 0;
    for (int j = 0; j < columns(); ++j) {
      if (basic_row_[j] >= 0 || is_fixed(j)) continue;
      if (!at_upper_[j] && d_[j] < 0) {
        entering = j;
        direction = 1;
        break;
      }
      if (at_upper_[j] && d_[j] > 0) {
        entering = j;
        direction = -1;
        break;
      }
    }
    if (entering < 0) return;

    // Ratio test. Candidate "columns" are the basics that hit a bound and
    // the entering variable itself (a bound flip); ties go to the smallest.
    std::optional<Rational> step;
    int blocking = -1;
    int blocking_row = -1;
    bool hits_upper = false;
    if (lo_[entering] && up_[entering]) {
      step = *up_[entering] - *lo_[entering];
      blocking = entering;
    }
    for (std::size_t i = 0; i < basis_.size(); ++i) {
      const Rational& alpha = a_[i][entering];
      if (alpha == 0) continue;
      const int b = basis_[i];
      const Rational rate = -alpha * direction;
      std::optional<Rational> limit;
      bool upper_hit = false;
      if (rate < 0 && lo_[b]) {
        limit = (x_[b] - *lo_[b]) / -rate;
      } else if (rate > 0 && up_[b]) {
        limit = (*up_[b] - x_[b]) / rate;
        upper_hit = true;
      }
      if (!limit) continue;
      if (!step || *limit < *step || (*limit == *step && b < blocking)) {
        step = std::move(limit);
        blocking = b;
        blocking_row = static_cast<int>(i);
        hits_upper = upper_hit;
      }
    }
    if (!step) {
      throw Error(ErrorCode::kInternal, "unbounded packing objective");
    }
    if (blocking == entering) {
      at_upper_[entering] = !at_upper_[entering];
      continue;
    }
    pivot(blocking_row, entering);
    at_upper_[blocking] = hits_upper;
  }
}

Tableau::Status Tableau::solve() {
  refresh_values();
  refresh_reduced_costs();
  if (!dual_feasible()) {
    // Any basis is dual feasible for the zero objective, so a pure
    // feasibility pass can start from here.
    std::vector<Rational> saved = cost_;
    for (auto& c : cost_) c = 0;
    const Status status = dual_simplex();
    cost_ = std::move(saved);
    if (status == Status::kInfeasible) return status;
  } else if (dual_simplex() == Status::kInfeasible) {
    return Status::kInfeasible;
  }
  primal_simplex();
  refresh_values();
  return Status::kOptimal;
}

Rational Tableau::value(int var) const { return x_[var]; }

Rational Tableau::objective_value() const {
  Rational total = 0;
  for (int j = 0; j < columns(); ++j) {
    if (cost_[j] != 0) total += cost_[j] * x_[j];
  }
  return total;
}

}  // namespace storyloop::packing
