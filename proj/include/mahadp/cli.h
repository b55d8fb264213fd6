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
#ifndef MAHADP_CLI_H_
#define MAHADP_CLI_H_

#include <iosfwd>
#include <string_view>

namespace mahadp {

inline constexpr std::string_view kVersion = "1.0.0";

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntimeError = 1;
inline constexpr int kExitUsageError = 2;

// Entry point of the `mahadp` binary. `out` receives results, `err`
// diagnostics and warnings.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mahadp

#endif  // MAHADP_CLI_H_
