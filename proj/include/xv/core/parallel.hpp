// Copyright 2026 The crossview Authors.
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

#include <cstdint>
#include <functional>

namespace xv {

int num_threads();
void set_num_threads(int n);

// Runs fn(begin, end) over disjoint chunks of [begin, end). The partition
// depends only on (range, thread count), and chunks never share output
// elements in any caller, so results are bitwise reproducible for a fixed
// thread count. Falls back to a direct call for small ranges.
void parallel_for(int64_t begin, int64_t end, int64_t min_chunk,
                  const std::function<void(int64_t, int64_t)>& fn);

}  // namespace xv
