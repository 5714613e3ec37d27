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

#include "storyloop/metrics.hpp"

namespace storyloop {
namespace {

class SegmentBuilder {
 public:
  void add(DiffClass kind, std::string_view text) {
    if (text.empty()) return;
    if (!out_.empty() && out_.back().kind == kind) {
      out_.back().text.append(text);
      return;
    }
    out_.push_back({std::string(text), kind});
  }

  // Shared text if both sides agree byte-for-byte, otherwise a delete/add
  // pair.
  void add_aligned(std::string_view gen, std::string_view edit) {
    if (gen == edit) {
      add(DiffClass::kMatched, gen);
    } else {
      add(DiffClass::kDeleted, gen);
      add(DiffClass::kAdded, edit);
    }
  }

  std::vector<DiffSegment> take() { return std::move(out_); }

 private:
  std::vector<DiffSegment> out_;
};

std::string_view slice(std::string_view s, std::size_t b, std::size_t e) {
  return s.substr(b, e - b);
}

}  // namespace

std::string_view diff_class_name(DiffClass kind) {
  switch (kind) {
    case DiffClass::kMatched:
      return "MATCHED";
    case DiffClass::kAdded:
      return "ADDED";
    case DiffClass::kDeleted:
      return "DELETED";
  }
  return "MATCHED";
}

std::vector<DiffSegment> diff_segments(std::string_view generated,
                                       std::string_view edited,
                                       const StopwordList& stopwords) {
  const auto x = tokenize(generated, TokenizerMode::kMetric);
  const auto y = tokenize(edited, TokenizerMode::kMetric);
  SegmentBuilder out;
  std::size_t gen_cursor = 0, edit_cursor = 0;
  std::size_t gen_token = 0, edit_token = 0;
  // Text between alignments is shared only when it is identical on both
  // sides and holds no tokens (punctuation and spacing).
  auto gap = [&](std::size_t gen_end, std::size_t edit_end,
                 std::size_t gen_next, std::size_t edit_next) {
    if (gen_next == gen_token && edit_next == edit_token) {
      out.add_aligned(slice(generated, gen_cursor, gen_end),
                      slice(edited, edit_cursor, edit_end));
    } else {
      out.add(DiffClass::kDeleted, slice(generated, gen_cursor, gen_end));
      out.add(DiffClass::kAdded, slice(edited, edit_cursor, edit_end));
    }
  };
  for (const auto& span : user_matches(x, y, stopwords)) {
    if (!span.counted) continue;
    gap(x.offsets[span.start_x].begin, y.offsets[span.start_y].begin,
        span.start_x, span.start_y);
    for (std::size_t k = 0; k < span.length; ++k) {
      const auto& gx = x.offsets[span.start_x + k];
      const auto& ey = y.offsets[span.start_y + k];
      if (k > 0) {
        const auto& gp = x.offsets[span.start_x + k - 1];
        const auto& ep = y.offsets[span.start_y + k - 1];
        out.add_aligned(slice(generated, gp.end, gx.begin),
                        slice(edited, ep.end, ey.begin));
      }
      out.add_aligned(slice(generated, gx.begin, gx.end),
                      slice(edited, ey.begin, ey.end));
    }
    gen_token = span.start_x + span.length;
    edit_token = span.start_y + span.length;
    gen_cursor = x.offsets[gen_token - 1].end;
    edit_cursor = y.offsets[edit_token - 1].end;
  }
  gap(generated.size(), edited.size(), x.size(), y.size());
  return out.take();
}

}  // namespace storyloop
