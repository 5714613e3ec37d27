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

#include <iosfwd>
#include <string>
#include <vector>

namespace storyloop::cli {

enum ExitStatus : int {
  kSuccess = 0,
  kUsageError = 1,
  kDataError = 2,
  kInternalError = 3,
};

// Entry point of the `storyloop` tool. argv[0] is the program name.
int run(const std::vector<std::string>& argv, std::ostream& out,
        std::ostream& err);

}  // namespace storyloop::cli
