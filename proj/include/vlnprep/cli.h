//
// Copyright 2026 The vlnprep Authors
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

#ifndef VLNPREP_CLI_H_
#define VLNPREP_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace vlnprep {

inline constexpr std::string_view kToolName = "vlnprep";
inline constexpr std::string_view kToolVersion = "1.0.0";
inline constexpr int kFormatVersion = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitUsage = 2;

// "sha256:<hex>" of a file's bytes.
std::string FileDigest(const std::filesystem::path& path);

// Provenance block embedded in every output. Contains no wall-clock time and
// no output paths, so identical inputs and flags give identical bytes.
struct RunManifest {
  std::string subcommand;
  nlohmann::ordered_json flags = nlohmann::ordered_json::object();
  nlohmann::ordered_json seed;  // null for deterministic subcommands
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();

  void AddInput(std::string_view role, const std::filesystem::path& path);
  nlohmann::ordered_json ToJson() const;
};

// Runs one subcommand. args excludes the program name. Returns 0 on success,
// 1 on validation errors, 2 on usage errors; diagnostics go to err, one line
// per failure.
int Dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace vlnprep

#endif  // VLNPREP_CLI_H_
