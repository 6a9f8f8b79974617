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

#include <cstdlib>
#include <string>
#include <vector>

#include "xv/cli/commands.hpp"
#include "xv/core/parallel.hpp"

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("XV_THREADS")) {
    xv::set_num_threads(std::atoi(threads));
  }
  std::vector<std::string> args(argv + 1, argv + argc);
  return xv::cli::run(args);
}
