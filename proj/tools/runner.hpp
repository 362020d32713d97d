/*
 Copyright 2026 The gjump Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#pragma once

// Batch experiment runner: config validation, dispatch to the library, and the
// output directory (CSV tables, JSON summary, plot series, manifest).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <gjump/serialize.hpp>

namespace gjump::cli {

inline constexpr const char* kToolkitVersion = "0.1.0";

inline constexpr const char* kKinds[] = {"simulate",   "cost",      "chattering", "variational",
                                         "mp-strict",  "mp-near",   "mp-relaxed", "bsde-stability"};

struct Violation {
  std::string path;  // JSON pointer into the document
  std::string message;
};

/// Every violation found, in document order; empty for a valid config.
std::vector<Violation> validate_config(const json& doc);

class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<Violation> v);
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

/// Parses a JSON file. Throws Error on I/O or syntax problems.
json load_json(const std::filesystem::path& path);

struct RunOptions {
  std::optional<std::filesystem::path> output_dir;
  int threads = 0;  // 0 keeps the current default
  std::optional<std::uint64_t> seed_override;
};

struct RunResult {
  bool pass = true;
  std::filesystem::path output_dir;
  std::vector<std::filesystem::path> files;  // relative to output_dir, in write order
  json summary;
  json manifest;
};

/// Validates, runs and writes every output. Throws ConfigError for an invalid
/// document and gjump::Error for failures inside the library.
RunResult run_experiment(const json& doc, const RunOptions& options = {});

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Entry point shared by the executable and the CLI tests. Returns the exit
/// code: 0 pass, 2 failed verdict, 1 error.
int cli_main(int argc, char** argv);

}  // namespace gjump::cli
