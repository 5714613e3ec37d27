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
#include <cmath>
#include <numeric>

#include "storyloop/error.hpp"
#include "storyloop/metrics.hpp"

namespace storyloop {

Correlation pearson_r(const std::vector<double>& a,
                      const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "pearson_r needs equally long series");
  }
  const std::size_t n = a.size();
  if (n < 2) {
    throw Error(ErrorCode::kDegenerateInput, "pearson_r needs at least 2 points");
  }
  auto constant = [](const std::vector<double>& v) {
    for (double value : v) {
      if (value != v.front()) return false;
    }
    return true;
  };
  if (constant(a) || constant(b)) {
    throw Error(ErrorCode::kDegenerateInput, "pearson_r on a constant series");
  }
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0;
  double var_a = 0.0;
  double var_b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  double r = cov / std::sqrt(var_a * var_b);
  r = std::clamp(r, -1.0, 1.0);
  return {r, n};
}

RatingsMatrix::RatingsMatrix(std::vector<std::vector<int>> rows)
    : rows_(std::move(rows)) {
  if (rows_.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "Fleiss' kappa needs >= 2 items");
  }
  const std::size_t categories = rows_[0].size();
  if (categories == 0) {
    throw Error(ErrorCode::kInvalidArgument, "ratings matrix has no categories");
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != categories) {
      throw Error(ErrorCode::kInvalidArgument,
                  "ratings matrix rows differ in width");
    }
    int total = 0;
    for (int c : rows_[i]) {
      if (c < 0) {
        throw Error(ErrorCode::kInvalidArgument, "negative rating count");
      }
      total += c;
    }
    if (i == 0) raters_ = total;
    if (total != raters_) {
      throw Error(ErrorCode::kInconsistentRaterCount,
                  "item " + std::to_string(i) + " has " +
                      std::to_string(total) + " ratings, expected " +
                      std::to_string(raters_));
    }
  }
  if (raters_ < 2) {
    throw Error(ErrorCode::kInconsistentRaterCount,
                "Fleiss' kappa needs >= 2 raters per item");
  }
}

RatingsMatrix RatingsMatrix::from_labels(
    const std::vector<std::vector<int>>& labels, int first, int last) {
  if (last < first) {
    throw Error(ErrorCode::kInvalidArgument, "empty category range");
  }
  std::vector<std::vector<int>> rows;
  for (const auto& item : labels) {
    std::vector<int> row(static_cast<std::size_t>(last - first + 1), 0);
    for (int label : item) {
      if (label < first || label > last) {
        throw Error(ErrorCode::kInvalidArgument,
                    "label " + std::to_string(label) + " outside range");
      }
      ++row[static_cast<std::size_t>(label - first)];
    }
    rows.push_back(std::move(row));
  }
  return RatingsMatrix(std::move(rows));
}

double fleiss_kappa(const RatingsMatrix& m) {
  const auto& rows = m.rows();
  const double n = m.raters();
  const double items = static_cast<double>(rows.size());
  std::vector<double> category_totals(m.categories(), 0.0);
  double observed = 0.0;
  for (const auto& row : rows) {
    double agreeing = 0.0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      agreeing += static_cast<double>(row[j]) * row[j];
      category_totals[j] += row[j];
    }
    observed += (agreeing - n) / (n * (n - 1.0));
  }
  observed /= items;
  double chance = 0.0;
  for (double total : category_totals) {
    const double p = total / (items * n);
    chance += p * p;
  }
  if (chance >= 1.0) return 1.0;
  return (observed - chance) / (1.0 - chance);
}

}  // namespace storyloop
