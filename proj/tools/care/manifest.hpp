/**
 * Copyright 2026 The CARE Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace care::cli {

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

// Record of one command invocation, written next to its outputs. Holds no
// timestamps so reruns produce identical manifests.
struct RunManifest {
  std::string subcommand;
  nlohmann::json arguments = nlohmann::json::object();
  nlohmann::json config = nullptr;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, std::filesystem::path>> inputs;  // (role, path)
  std::vector<std::filesystem::path> outputs;

  nlohmann::json to_json() const;
};

/// Writes via a temporary file and rename so readers never see partial output.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// `<output>.manifest.json` for single-file outputs.
std::filesystem::path manifest_path_for(const std::filesystem::path& output);

}  // namespace care::cli
