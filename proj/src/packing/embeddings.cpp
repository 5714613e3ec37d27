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
#include "storyloop/packing.hpp"

namespace storyloop::packing {
namespace {

void check_row(Eigen::Index id, const Eigen::MatrixXd& table,
               const char* what) {
  if (id < 0 || id >= table.rows()) {
    throw Error(ErrorCode::kIdOutOfRange,
                std::string(what) + " id " + std::to_string(id) +
                    " outside table of " + std::to_string(table.rows()) +
                    " rows");
  }
}

}  // namespace

Eigen::MatrixXd compose_embeddings(const ComposedContext& context,
                                   const EmbeddingTables& tables) {
  const Eigen::Index d = tables.width();
  if (tables.position.cols() != d || tables.segment.cols() != d) {
    throw Error(ErrorCode::kDimensionMismatch,
                "embedding tables disagree on width");
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(context.items.size()), d);
  for (std::size_t i = 0; i < context.items.size(); ++i) {
    const auto& item = context.items[i];
    const auto pos = static_cast<Eigen::Index>(item.position);
    check_row(pos, tables.position, "position");
    check_row(item.token, tables.token, "token");
    auto row = out.row(static_cast<Eigen::Index>(i));
    row = tables.position.row(pos) + tables.token.row(item.token);
    for (SegmentId s : item.segments) {
      check_row(s, tables.segment, "segment");
      row += tables.segment.row(s);
    }
  }
  return out;
}

}  // namespace storyloop::packing
