// Copyright 2026 The StreamGate Authors.
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

// Stdio scorer server backed by a scenario file, for bridge tests.
//   bridge_fixture SCENARIO            serve until stdin closes
//   bridge_fixture SCENARIO --crash N  exit after N requests

#include <cstdlib>
#include <iostream>
#include <string>

#include "streamgate/bridge_scorer.h"
#include "streamgate/table_scorer.h"

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: bridge_fixture SCENARIO [--crash N]\n";
    return 2;
  }
  long crash_after = -1;
  if (argc == 4 && std::string(argv[2]) == "--crash") crash_after = std::atol(argv[3]);
  streamgate::TableScorer scorer(streamgate::Scenario::load(argv[1]));
  std::string line;
  long served = 0;
  while (std::getline(std::cin, line)) {
    if (crash_after >= 0 && served++ >= crash_after) return 1;
    std::cout << streamgate::serve_request(scorer, line) << '\n' << std::flush;
  }
  return 0;
}
