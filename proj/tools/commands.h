// Copyright 2026 The fsed Authors.
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

#ifndef FSED_TOOLS_COMMANDS_H_
#define FSED_TOOLS_COMMANDS_H_

#include <filesystem>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace fsed::cli {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3, kExitNumeric = 4 };

// Parses `args` (args[0] is the program name), runs the selected command and
// maps failures to exit codes. Never throws.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version_string();

// Provenance record written next to every command's outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  std::string config;  // TOML snapshot of the effective options
  uint64_t seed = 0;
  std::string version;
  std::string started_utc;
  std::string finished_utc;
  std::vector<std::pair<std::string, std::string>> inputs;
  std::vector<std::pair<std::string, std::string>> outputs;
};

void write_run_manifest(const std::filesystem::path& path, const RunManifest& manifest);

}  // namespace fsed::cli

#endif  // FSED_TOOLS_COMMANDS_H_
