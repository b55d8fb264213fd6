//
// Copyright 2026 The mahadp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#ifndef MAHADP_TESTS_CLI_RUNNER_H_
#define MAHADP_TESTS_CLI_RUNNER_H_

#include <sstream>
#include <string>
#include <vector>

#include "mahadp/cli.h"

namespace mahadp::testing {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

inline CliResult RunMahadp(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"mahadp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = RunCli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

}  // namespace mahadp::testing

#endif  // MAHADP_TESTS_CLI_RUNNER_H_
