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
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "storyloop/error.hpp"
#include "storyloop/topics.hpp"

namespace storyloop::topics {
namespace {

std::string ascii_lower(std::string s) {
  for (char& c : s) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return s;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Lexicon Lexicon::parse(std::string_view text) {
  Lexicon lex;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string word;
    if (!(fields >> word)) continue;
    std::vector<double> values;
    std::string v;
    while (fields >> v) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(v, &used));
        if (used != v.size()) throw std::invalid_argument(v);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kParseError, "lexicon line " +
                                                std::to_string(line_no) +
                                                ": bad number '" + v + "'");
      }
    }
    if (values.empty()) {
      throw Error(ErrorCode::kParseError,
                  "lexicon line " + std::to_string(line_no) + ": no vector");
    }
    if (lex.dim_ == 0) lex.dim_ = static_cast<int>(values.size());
    if (static_cast<int>(values.size()) != lex.dim_) {
      throw Error(ErrorCode::kDimensionMismatch,
                  "lexicon line " + std::to_string(line_no) + ": expected " +
                      std::to_string(lex.dim_) + " values");
    }
    lex.add(word, Eigen::Map<Eigen::VectorXd>(values.data(), lex.dim_));
  }
  return lex;
}

Lexicon Lexicon::load(const std::string& path) { return parse(read_file(path)); }

void Lexicon::add(const std::string& word, const Eigen::VectorXd& vec) {
  if (dim_ == 0) dim_ = static_cast<int>(vec.size());
  if (vec.size() != dim_) {
    throw Error(ErrorCode::kDimensionMismatch, "vector for '" + word +
                                                   "' has width " +
                                                   std::to_string(vec.size()));
  }
  vectors_.emplace(ascii_lower(word), vec);
}

const Eigen::VectorXd* Lexicon::find(std::string_view word) const {
  auto it = vectors_.find(word);
  return it == vectors_.end() ? nullptr : &it->second;
}

Eigen::VectorXd encode_text(const TokenSequence& tokens, const Lexicon& lexicon) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(lexicon.dim());
  std::size_t found = 0;
  for (const std::string& t : tokens.tokens) {
    if (const Eigen::VectorXd* v = lexicon.find(t)) {
      sum += *v;
      ++found;
    }
  }
  if (found == 0) throw Error(ErrorCode::kNoKnownTokens, "no known tokens");
  return sum / static_cast<double>(found);
}

std::vector<std::pair<std::string, double>> nearest_words(
    const Eigen::MatrixXd& r, int row, const Lexicon& lexicon, std::size_t k) {
  if (row < 0 || row >= r.rows()) {
    throw Error(ErrorCode::kRowOutOfRange,
                "row " + std::to_string(row) + " out of range");
  }
  if (r.cols() != lexicon.dim()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "dictionary width differs from lexicon width");
  }
  const Eigen::VectorXd q = r.row(row).transpose();
  const double qn = q.norm();
  std::vector<std::pair<std::string, double>> scored;
  scored.reserve(lexicon.size());
  for (const auto& [word, v] : lexicon.entries()) {
    const double denom = qn * v.norm();
    scored.emplace_back(word, denom > 0 ? q.dot(v) / denom : 0.0);
  }
  k = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                    scored.end(), [](const auto& a, const auto& b) {
                      if (a.second != b.second) return a.second > b.second;
                      return a.first < b.first;
                    });
  scored.resize(k);
  return scored;
}

std::string format_model(const Eigen::MatrixXd& r) {
  std::ostringstream out;
  out << r.rows() << " " << r.cols() << "\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      out << (j ? " " : "") << r(i, j);
    }
    out << "\n";
  }
  return out.str();
}

Eigen::MatrixXd parse_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  long k = 0, d = 0;
  if (!(in >> k >> d) || k < 1 || d < 1) {
    throw Error(ErrorCode::kParseError, "model header must be `K d`");
  }
  Eigen::MatrixXd r(k, d);
  for (long i = 0; i < k; ++i) {
    for (long j = 0; j < d; ++j) {
      if (!(in >> r(i, j)) || !std::isfinite(r(i, j))) {
        throw Error(ErrorCode::kParseError,
                    "model row " + std::to_string(i) + " is short or invalid");
      }
    }
  }
  std::string extra;
  if (in >> extra) throw Error(ErrorCode::kParseError, "trailing model data");
  return r;
}

void save_model(const Eigen::MatrixXd& r, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + path);
  out << format_model(r);
}

Eigen::MatrixXd load_model(const std::string& path) {
  return parse_model(read_file(path));
}

}  // namespace storyloop::topics
