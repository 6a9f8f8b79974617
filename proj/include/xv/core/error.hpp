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

#include <stdexcept>
#include <string>

namespace xv {

// All recoverable failures carry a short machine-parsable category
// ("io", "shape", "config", "degenerate", "numeric", "state") plus a
// human-readable message. The CLI prints "error: category=<cat> <msg>".
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}

  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

[[noreturn]] inline void fail(const std::string& category,
                              const std::string& message) {
  throw Error(category, message);
}

inline void require(bool cond, const std::string& category,
                    const std::string& message) {
  if (!cond) fail(category, message);
}

}  // namespace xv
