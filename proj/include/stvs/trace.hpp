// Copyright (c) 2026 The STVS Authors. All Rights Reserved.
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

#include <algorithm>
#include <cstddef>
#include <string>
#include <vector>

namespace stvs {

/// Ordered log of high-level ops executed during a forward pass. Entries are
/// "<scope>/<op>", e.g. "decoder.s3/tm.conv3d".
struct OpTrace {
  std::vector<std::string> ops;

  void record(const std::string& scope, const std::string& op) {
    ops.push_back(scope.empty() ? op : scope + "/" + op);
  }

  std::size_t count(const std::string& op) const {
    return static_cast<std::size_t>(std::count_if(ops.begin(), ops.end(), [&](const auto& e) {
      const auto slash = e.rfind('/');
      return (slash == std::string::npos ? e : e.substr(slash + 1)) == op;
    }));
  }

  std::size_t count(const std::string& scope, const std::string& op) const {
    return static_cast<std::size_t>(std::count(ops.begin(), ops.end(), scope + "/" + op));
  }
};

inline void trace_op(OpTrace* trace, const std::string& scope, const std::string& op) {
  if (trace) trace->record(scope, op);
}

}  // namespace stvs
