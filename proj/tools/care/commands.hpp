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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace care::cli {

enum ExitCode : int {
  kSuccess = 0,
  kInputError = 1,
  kConfigError = 2,
  kAcceptanceFailure = 3,
};

struct DatasetInputs {
  std::filesystem::path source;
  std::filesystem::path target;
  std::string format = "auto";  // coco | jsonl | auto (by extension)
  bool clamp = false;
};

struct StatsOptions {
  DatasetInputs inputs;
  std::filesystem::path out;
};

struct WeightsOptions {
  DatasetInputs inputs;
  std::filesystem::path out;
  bool raw_ratio = false;
  std::string domain = "target";
};

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
};

struct BenchOptions {
  std::filesystem::path config;
  std::filesystem::path out_dir;
  std::optional<std::size_t> threads;
};

struct VerifyOptions {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t max_support = 4;
  std::optional<std::filesystem::path> out;
};

struct GenerateOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out_dir;
};

// Each command reports progress on `log` and returns an ExitCode. Errors are
// reported on `err` and mapped to exit codes; nothing escapes as an exception.
int cmd_stats(const StatsOptions& options, std::ostream& log, std::ostream& err);
int cmd_weights(const WeightsOptions& options, std::ostream& log, std::ostream& err);
int cmd_train(const TrainOptions& options, std::ostream& log, std::ostream& err);
int cmd_bench(const BenchOptions& options, std::ostream& log, std::ostream& err);
int cmd_verify(const VerifyOptions& options, std::ostream& log, std::ostream& err);
int cmd_generate(const GenerateOptions& options, std::ostream& log, std::ostream& err);

}  // namespace care::cli
