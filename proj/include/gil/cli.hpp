/*
 * Copyright 2026 The gil Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Command-line front end: generate, train, analyze and report.
//
// Exit codes: 0 success, 2 usage or input errors, 3 numeric failures. The
// GIL_SEED environment variable overrides --seed.

#ifndef GIL_CLI_HPP_
#define GIL_CLI_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace gil {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

// `args` excludes the program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Lowercase hex SHA-256 of a file's bytes.
std::string Sha256File(const std::filesystem::path& path);

}  // namespace gil

#endif  // GIL_CLI_HPP_
