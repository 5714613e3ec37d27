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
#include "storyloop/service.hpp"

namespace storyloop::service {

json Ratings::to_json() const {
  json j = json::object();
  for (std::size_t i = 0; i < values.size(); ++i) j[kRatingNames[i]] = values[i];
  return j;
}

Ratings Ratings::from_json(const json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::kInvalidArgument, "ratings must be an object");
  }
  Ratings r;
  for (std::size_t i = 0; i < r.values.size(); ++i) {
    const char* name = kRatingNames[i];
    if (!j.contains(name)) {
      throw Error(ErrorCode::kInvalidArgument,
                  std::string("ratings.") + name + " is missing");
    }
    if (!j[name].is_number_integer()) {
      throw Error(ErrorCode::kRatingOutOfRange,
                  std::string("ratings.") + name + " must be an integer 1..5");
    }
    const auto v = j[name].get<std::int64_t>();
    if (v < 1 || v > 5) {
      throw Error(ErrorCode::kRatingOutOfRange,
                  std::string("ratings.") + name + " = " + std::to_string(v) +
                      " is outside 1..5");
    }
    r.values[i] = static_cast<int>(v);
  }
  return r;
}

json to_json(const EditMetricReport& r) {
  json spans = json::array();
  for (const MatchSpan& s : r.spans) {
    spans.push_back({{"start_x", s.start_x},
                     {"start_y", s.start_y},
                     {"length", s.length},
                     {"counted", s.counted}});
  }
  return {{"precision", r.precision},
          {"recall", r.recall},
          {"f1", r.f1},
          {"matched_tokens", r.matched_tokens},
          {"spans", std::move(spans)}};
}

json to_json(const SuggestionRecord& r) {
  json j;
  j["id"] = r.id;
  j["model"] = r.model;
  j["story_id"] = r.coordinates.story_id;
  j["scene"] = r.coordinates.scene;
  j["entry"] = r.coordinates.entry;
  j["context_digest"] = r.context_digest;
  j["context_length"] = r.context_length;
  j["generated"] = r.generated;
  j["config"] = r.config.to_json();
  j["timestamp"] = r.timestamp;
  return j;
}

json to_json(const PublishedRecord& r) {
  json j;
  j["suggestion_id"] = r.suggestion_id;
  j["final_text"] = r.final_text;
  j["ratings"] = r.ratings.to_json();
  j["comment"] = r.comment ? json(*r.comment) : json(nullptr);
  j["degenerate"] = r.degenerate();
  if (r.scores) {
    j["scores"] = {{"user", to_json(r.scores->user)},
                   {"rouge_l", to_json(r.scores->rouge_l)},
                   {"rouge_w", to_json(r.scores->rouge_w)}};
  } else {
    j["scores"] = nullptr;
  }
  j["timestamp"] = r.timestamp;
  return j;
}

json diff_json(const std::vector<DiffSegment>& segments) {
  json out = json::array();
  for (const DiffSegment& s : segments) {
    out.push_back({{"text", s.text}, {"class", std::string(diff_class_name(s.kind))}});
  }
  return out;
}

}  // namespace storyloop::service
