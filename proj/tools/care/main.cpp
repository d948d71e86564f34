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
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "care/version.hpp"
#include "commands.hpp"

namespace {

void add_dataset_flags(CLI::App* cmd, care::cli::DatasetInputs& in) {
  cmd->add_option("--source", in.source, "Source-domain annotation file")->required();
  cmd->add_option("--target", in.target, "Target-domain annotation file")->required();
  cmd->add_option("--format", in.format, "coco, jsonl, or auto (by file extension)")
      ->check(CLI::IsMember({"auto", "coco", "jsonl"}));
  cmd->add_flag("--clamp", in.clamp, "Clip boxes that overshoot the image instead of rejecting them");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace care::cli;
  CLI::App app{"care: conditional alignment and reweighting toolkit"};
  app.set_version_flag("--version", std::string(care::kVersion));
  app.require_subcommand(1);

  StatsOptions stats;
  auto* stats_cmd = app.add_subcommand("stats", "Content-gap report for a source/target pair");
  add_dataset_flags(stats_cmd, stats.inputs);
  stats_cmd->add_option("--out", stats.out, "Report JSON path")->required();

  WeightsOptions weights;
  auto* weights_cmd = app.add_subcommand("weights", "Per-annotation class and box weights as CSV");
  add_dataset_flags(weights_cmd, weights.inputs);
  weights_cmd->add_option("--out", weights.out, "CSV path")->required();
  weights_cmd->add_flag("--raw-ratio", weights.raw_ratio, "Export raw density ratios without smoothing");
  weights_cmd->add_option("--domain", weights.domain, "Which dataset's annotations to export")
      ->check(CLI::IsMember({"source", "target"}));

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train one configuration on the toy task");
  train_cmd->add_option("--config", train.config, "Training config JSON")->required();
  train_cmd->add_option("--seed", train.seed, "Override the config seed");
  train_cmd->add_option("--out", train.out, "TrainReport JSON path")->required();

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run an ablation grid over seeds");
  bench_cmd->add_option("--config", bench.config, "Bench grid JSON")->required();
  bench_cmd->add_option("--out", bench.out_dir, "Output directory")->required();
  bench_cmd->add_option("--threads", bench.threads, "Worker threads (default: CARE_THREADS or all cores)");

  VerifyOptions verify;
  auto* verify_cmd = app.add_subcommand("verify", "Check the reweighting identity on random finite problems");
  verify_cmd->add_option("--trials", verify.trials, "Number of random instances");
  verify_cmd->add_option("--seed", verify.seed, "PRNG seed");
  verify_cmd->add_option("--max-support", verify.max_support, "Largest support size per axis")
      ->check(CLI::PositiveNumber);
  verify_cmd->add_option("--out", verify.out, "Report JSON path (default: stdout)");

  GenerateOptions generate;
  auto* generate_cmd = app.add_subcommand("generate", "Export toy-task splits as JSONL plus feature CSVs");
  generate_cmd->add_option("--config", generate.config, "Training config JSON")->required();
  generate_cmd->add_option("--seed", generate.seed, "Override the config seed");
  generate_cmd->add_option("--out", generate.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  if (*stats_cmd) return cmd_stats(stats, std::cout, std::cerr);
  if (*weights_cmd) return cmd_weights(weights, std::cout, std::cerr);
  if (*train_cmd) return cmd_train(train, std::cout, std::cerr);
  if (*bench_cmd) return cmd_bench(bench, std::cout, std::cerr);
  if (*verify_cmd) return cmd_verify(verify, std::cout, std::cerr);
  if (*generate_cmd) return cmd_generate(generate, std::cout, std::cerr);
  return kConfigError;
}
