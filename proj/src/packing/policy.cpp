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

#include <cctype>
#include <charconv>
#include <fstream>
#include <numeric>
#include <sstream>

#include "storyloop/error.hpp"
#include "storyloop/packing.hpp"

namespace storyloop {
namespace resources {
std::string_view default_policy();
}  // namespace resources

namespace packing {
namespace {

Error parse_error(int line, const std::string& message) {
  return Error(ErrorCode::kParseError,
               "policy line " + std::to_string(line) + ": " + message);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string word;
  while (in >> word) out.push_back(word);
  return out;
}

std::vector<std::string> split_commas(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    auto part = trim(s.substr(pos, comma - pos));
    if (!part.empty()) out.emplace_back(part);
    pos = comma + 1;
  }
  return out;
}

bool is_name_start(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}

bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' ||
         c == '.';
}

std::int64_t parse_int(std::string_view s, int line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw parse_error(line, "expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

// expr := ['-'] term (('+' | '-') term)*
// term := [number ['*']] name
std::vector<Term> parse_expression(std::string_view text, int line) {
  std::vector<Term> terms;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) {
      ++i;
    }
  };
  bool first = true;
  while (true) {
    skip();
    if (i >= text.size()) break;
    bool negative = false;
    if (text[i] == '+' || text[i] == '-') {
      negative = text[i] == '-';
      ++i;
      skip();
    } else if (!first) {
      throw parse_error(line, "expected '+' or '-' between terms");
    }
    first = false;
    Fraction coef = Fraction::integer(1);
    if (i < text.size() &&
        (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.')) {
      std::size_t j = i;
      while (j < text.size() &&
             (std::isdigit(static_cast<unsigned char>(text[j])) ||
              text[j] == '.' || text[j] == '/')) {
        ++j;
      }
      coef = Fraction::parse(text.substr(i, j - i));
      i = j;
      skip();
      if (i < text.size() && text[i] == '*') {
        ++i;
        skip();
      }
    }
    if (i >= text.size() || !is_name_start(text[i])) {
      throw parse_error(line, "expected a segment name in '" +
                                  std::string(text) + "'");
    }
    std::size_t j = i;
    while (j < text.size() && is_name_char(text[j])) ++j;
    if (negative) coef.num = -coef.num;
    terms.push_back({std::string(text.substr(i, j - i)), coef});
    i = j;
  }
  if (terms.empty()) throw parse_error(line, "empty expression");
  return terms;
}

Constraint parse_constraint(std::string_view line_text, int line) {
  const auto colon = line_text.find(':');
  Constraint c;
  c.name = std::string(trim(line_text.substr(0, colon)));
  if (c.name.empty()) throw parse_error(line, "constraint needs a name");
  std::string_view rest = line_text.substr(colon + 1);
  const auto at = rest.rfind('@');
  if (at == std::string_view::npos) {
    throw parse_error(line, "missing '@ <priority|required>'");
  }
  const std::string priority(trim(rest.substr(at + 1)));
  if (priority == "required") {
    c.priority = Priority::required();
  } else {
    const auto level = parse_int(priority, line);
    if (level < 1) throw parse_error(line, "priority must be >= 1");
    c.priority = Priority::strength(static_cast<int>(level));
  }
  const auto body = split_ws(rest.substr(0, at));
  // Find the relation keyword; everything before it is the expression.
  std::size_t rel_pos = body.size();
  for (std::size_t k = 0; k < body.size(); ++k) {
    if (body[k] == "le" || body[k] == "ge" || body[k] == "eq" ||
        body[k] == "<=" || body[k] == ">=" || body[k] == "==") {
      rel_pos = k;
    }
  }
  if (rel_pos == body.size() || rel_pos + 2 != body.size()) {
    throw parse_error(line, "expected '<expr> <le|ge|eq> <bound>'");
  }
  const std::string& rel = body[rel_pos];
  c.relation = (rel == "le" || rel == "<=")   ? Relation::kLe
               : (rel == "ge" || rel == ">=") ? Relation::kGe
                                              : Relation::kEq;
  std::string expr;
  for (std::size_t k = 0; k < rel_pos; ++k) expr += body[k] + " ";
  c.terms = parse_expression(expr, line);
  try {
    c.bound = Fraction::parse(body.back());
  } catch (const Error& e) {
    throw parse_error(line, e.what());
  }
  return c;
}

}  // namespace

std::string_view trim_name(Trim trim) {
  return trim == Trim::kHead ? "head" : "tail";
}

std::string_view relation_name(Relation relation) {
  switch (relation) {
    case Relation::kLe:
      return "le";
    case Relation::kGe:
      return "ge";
    case Relation::kEq:
      return "eq";
  }
  return "le";
}

Fraction Fraction::parse(std::string_view text) {
  text = trim(text);
  auto fail = [&] {
    return Error(ErrorCode::kParseError,
                 "invalid number '" + std::string(text) + "'");
  };
  if (text.empty()) throw fail();
  bool negative = false;
  std::string_view body = text;
  if (body.front() == '-' || body.front() == '+') {
    negative = body.front() == '-';
    body.remove_prefix(1);
  }
  Fraction f;
  const auto slash = body.find('/');
  if (slash != std::string_view::npos) {
    f.num = parse_int(body.substr(0, slash), 0);
    f.den = parse_int(body.substr(slash + 1), 0);
    if (f.den <= 0 || f.num < 0) throw fail();
  } else {
    const auto dot = body.find('.');
    const std::string_view whole = body.substr(0, dot);
    const std::string_view frac =
        dot == std::string_view::npos ? std::string_view{} : body.substr(dot + 1);
    if (whole.empty() && frac.empty()) throw fail();
    if (frac.size() > 15) throw fail();
    std::int64_t scale = 1;
    for (std::size_t k = 0; k < frac.size(); ++k) scale *= 10;
    std::int64_t w = 0;
    std::int64_t fr = 0;
    if (!whole.empty()) {
      auto [p, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), w);
      if (ec != std::errc() || p != whole.data() + whole.size()) throw fail();
    }
    if (!frac.empty()) {
      auto [p, ec] = std::from_chars(frac.data(), frac.data() + frac.size(), fr);
      if (ec != std::errc() || p != frac.data() + frac.size()) throw fail();
    }
    f.num = w * scale + fr;
    f.den = scale;
  }
  if (negative) f.num = -f.num;
  const std::int64_t g = std::gcd(f.num, f.den);
  if (g > 1) {
    f.num /= g;
    f.den /= g;
  }
  return f;
}

std::string Fraction::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

Priority Priority::strength(int level) {
  if (level < 1) {
    throw Error(ErrorCode::kInvalidArgument, "soft priority must be >= 1");
  }
  return Priority(level);
}

std::string Priority::str() const {
  return is_required() ? "required" : std::to_string(level_);
}

std::int64_t Allocation::at(const std::string& segment) const {
  auto it = lengths.find(segment);
  return it == lengths.end() ? 0 : it->second;
}

std::int64_t Allocation::total() const {
  std::int64_t sum = 0;
  for (const auto& [name, len] : lengths) sum += len;
  return sum;
}

Policy Policy::parse(std::string_view text) {
  Policy policy;
  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    const auto words = split_ws(line);
    if (words[0] == "budget" || words[0] == "reserve") {
      if (words.size() != 2) throw parse_error(line_no, "expected one value");
      const auto v = parse_int(words[1], line_no);
      if (v < 0) throw parse_error(line_no, words[0] + " must be >= 0");
      (words[0] == "budget" ? policy.budget : policy.reserve) = v;
      continue;
    }
    if (words[0] == "segment") {
      if (words.size() < 2) throw parse_error(line_no, "segment needs a name");
      PolicySegment seg{words[1], Trim::kHead, {}};
      for (std::size_t k = 2; k < words.size(); ++k) {
        const auto eq = words[k].find('=');
        const std::string key = words[k].substr(0, eq);
        const std::string value =
            eq == std::string::npos ? "" : words[k].substr(eq + 1);
        if (key == "trim" && (value == "head" || value == "tail")) {
          seg.trim = value == "head" ? Trim::kHead : Trim::kTail;
        } else if (key == "ids") {
          seg.segment_ids = split_commas(value);
        } else {
          throw parse_error(line_no, "unknown segment option '" + words[k] + "'");
        }
      }
      for (const auto& existing : policy.segments) {
        if (existing.name == seg.name) {
          throw parse_error(line_no, "duplicate segment '" + seg.name + "'");
        }
      }
      policy.segments.push_back(std::move(seg));
      continue;
    }
    if (line.find(':') != std::string_view::npos) {
      policy.constraints.push_back(parse_constraint(line, line_no));
      continue;
    }
    throw parse_error(line_no, "unrecognised line '" + std::string(line) + "'");
  }
  return policy;
}

Policy Policy::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::vector<Constraint> Policy::instantiate(
    const std::vector<SegmentSpec>& specs, bool strict) const {
  auto matches = [&](const std::string& name) {
    std::vector<const SegmentSpec*> out;
    for (const auto& spec : specs) {
      if (spec.name == name) return std::vector<const SegmentSpec*>{&spec};
    }
    for (const auto& spec : specs) {
      if (spec.kind_or_name() == name) out.push_back(&spec);
    }
    return out;
  };

  std::vector<Constraint> out;
  for (const auto& c : constraints) {
    if (c.terms.size() == 1) {
      const auto targets = matches(c.terms[0].segment);
      if (targets.empty() && strict) {
        throw Error(ErrorCode::kUnknownSegment,
                    "constraint '" + c.name + "' references unknown segment '" +
                        c.terms[0].segment + "'");
      }
      for (const auto* spec : targets) {
        Constraint bound = c;
        bound.terms[0].segment = spec->name;
        if (targets.size() > 1 || spec->name != c.terms[0].segment) {
          bound.name = c.name + "[" + spec->name + "]";
        }
        out.push_back(std::move(bound));
      }
      continue;
    }
    Constraint bound = c;
    bound.terms.clear();
    bool missing = false;
    for (const auto& term : c.terms) {
      const auto targets = matches(term.segment);
      if (targets.empty()) {
        missing = true;
        if (strict) {
          throw Error(ErrorCode::kUnknownSegment,
                      "constraint '" + c.name +
                          "' references unknown segment '" + term.segment + "'");
        }
      }
      for (const auto* spec : targets) {
        bound.terms.push_back({spec->name, term.coefficient});
      }
    }
    if (!missing) out.push_back(std::move(bound));
  }
  return out;
}

std::vector<SegmentSpec> Policy::declared_specs(
    const std::map<std::string, std::int64_t>& available) const {
  for (const auto& [name, len] : available) {
    bool known = false;
    for (const auto& seg : segments) known = known || seg.name == name;
    if (!known) {
      throw Error(ErrorCode::kUnknownSegment,
                  "segment '" + name + "' is not declared in the policy");
    }
  }
  Vocabulary ids;
  std::vector<SegmentSpec> specs;
  for (std::size_t k = 0; k < segments.size(); ++k) {
    const auto& seg = segments[k];
    SegmentSpec spec;
    spec.name = seg.name;
    spec.trim = seg.trim;
    spec.declared_index = static_cast<int>(k);
    auto it = available.find(seg.name);
    spec.available = it == available.end() ? 0 : it->second;
    const auto id_names =
        seg.segment_ids.empty() ? std::vector<std::string>{seg.name}
                                : seg.segment_ids;
    for (const auto& id : id_names) spec.segment_ids.push_back(ids.add(id));
    specs.push_back(std::move(spec));
  }
  return specs;
}

std::int64_t Policy::effective_budget() const {
  return std::max<std::int64_t>(0, budget - reserve);
}

const Policy& default_policy() {
  static const Policy policy = Policy::parse(resources::default_policy());
  return policy;
}

}  // namespace packing
}  // namespace storyloop
