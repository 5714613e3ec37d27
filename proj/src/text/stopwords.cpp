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

#include <fstream>
#include <sstream>

#include "storyloop/error.hpp"
#include "storyloop/text.hpp"

namespace storyloop {
namespace resources {
std::string_view stopwords_en();
}  // namespace resources

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' ||
                        s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() &&
         (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

}  // namespace

StopwordList::StopwordList(const std::vector<std::string>& words,
                           std::string version)
    : version_(std::move(version)) {
  for (const auto& w : words) words_.insert(ascii_lower(w));
}

StopwordList StopwordList::parse(std::string_view text) {
  StopwordList list;
  constexpr std::string_view kVersionTag = "# version:";
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = trim(text.substr(pos, nl - pos));
    pos = nl + 1;
    if (line.empty()) continue;
    if (line.starts_with(kVersionTag)) {
      list.version_ = std::string(trim(line.substr(kVersionTag.size())));
      continue;
    }
    if (line.front() == '#') continue;
    list.words_.insert(ascii_lower(line));
  }
  if (list.version_.empty()) {
    throw Error(ErrorCode::kParseError,
                "stopword list is missing a '# version: <id>' header");
  }
  return list;
}

StopwordList StopwordList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

bool StopwordList::contains(std::string_view token) const {
  if (token.empty()) return false;
  return words_.find(ascii_lower(token)) != words_.end();
}

const StopwordList& default_stopwords() {
  static const StopwordList list = StopwordList::parse(resources::stopwords_en());
  return list;
}

bool is_stopword(std::string_view token, const StopwordList& list) {
  return list.contains(token);
}

}  // namespace storyloop
