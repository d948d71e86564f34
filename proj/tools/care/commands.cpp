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
#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "care/annotations.hpp"
#include "care/config_error.hpp"
#include "care/content_stats.hpp"
#include "care/trainer.hpp"
#include "care/verify.hpp"
#include "manifest.hpp"

namespace care::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const annotations::AnnotationError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  }
}

json read_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open config file '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("", "malformed config '" + path.string() + "': " + e.what());
  }
}

annotations::DetectionDataset load_dataset(const fs::path& path, const std::string& format, bool clamp,
                                           Domain domain) {
  if (!fs::exists(path)) throw InputError("input file not found: '" + path.string() + "'");
  std::string resolved = format;
  if (resolved == "auto") resolved = path.extension() == ".jsonl" ? "jsonl" : "coco";
  annotations::LoadOptions options;
  options.clamp = clamp;
  options.domain = domain;
  annotations::DetectionDataset ds;
  if (resolved == "coco") {
    ds = annotations::load_coco(path, options);
  } else if (resolved == "jsonl") {
    ds = annotations::load_jsonl(path, options);
  } else {
    throw ConfigError("format", "unknown --format '" + format + "' (expected coco or jsonl)");
  }
  const auto violations = annotations::validate(ds);
  if (!violations.empty()) {
    throw annotations::AnnotationError(path.string() + ": " + violations.front());
  }
  return ds;
}

std::pair<annotations::DetectionDataset, annotations::DetectionDataset> load_pair(const DatasetInputs& in) {
  auto source = load_dataset(in.source, in.format, in.clamp, Domain::kSource);
  auto target = load_dataset(in.target, in.format, in.clamp, Domain::kTarget);
  annotations::harmonize_classes(source, target);
  return {std::move(source), std::move(target)};
}

json dataset_arguments(const DatasetInputs& in) {
  return {{"source", in.source.string()}, {"target", in.target.string()}, {"format", in.format}, {"clamp", in.clamp}};
}

// The config file itself plus the toy spec it points to, if any.
std::vector<std::pair<std::string, fs::path>> config_inputs(const fs::path& config_path, const json& config) {
  std::vector<std::pair<std::string, fs::path>> inputs = {{"config", config_path}};
  if (auto it = config.find("toy_spec_path"); it != config.end() && it->is_string()) {
    inputs.emplace_back("toy_spec", config_path.parent_path() / it->get<std::string>());
  }
  return inputs;
}

void write_manifest(const RunManifest& manifest, const fs::path& path) {
  write_file_atomic(path, manifest.to_json().dump(2) + "\n");
}

}  // namespace

int cmd_stats(const StatsOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const auto [source, target] = load_pair(options.inputs);
    const content::GapReport report = content::gap_report(source, target);
    write_file_atomic(options.out, json(report).dump(2) + "\n");

    RunManifest manifest;
    manifest.subcommand = "stats";
    manifest.arguments = dataset_arguments(options.inputs);
    manifest.arguments["out"] = options.out.string();
    manifest.config = {{"smoothing", report.smoothing}};
    manifest.inputs = {{"source", options.inputs.source}, {"target", options.inputs.target}};
    manifest.outputs = {options.out};
    write_manifest(manifest, manifest_path_for(options.out));
    log << "wrote gap report for " << report.classes.size() << " classes to " << options.out.string() << '\n';
    return kSuccess;
  });
}

int cmd_weights(const WeightsOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    Domain domain;
    try {
      domain = domain_from_string(options.domain);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("domain", e.what());
    }
    const auto [source, target] = load_pair(options.inputs);
    content::SmoothingParams smoothing;
    smoothing.raw_ratio = options.raw_ratio;
    const content::BoxRatioModel model = content::fit_box_ratio_model(source, target, smoothing);
    const annotations::DetectionDataset& chosen = domain == Domain::kSource ? source : target;
    const auto counts = content::class_counts(chosen);
    std::int64_t total = 0;
    for (auto c : counts) total += c;
    if (total == 0) throw InputError("the " + options.domain + " dataset has no annotations");
    const auto class_weights = content::inverse_frequency_weights(counts, domain);
    const auto rows = content::annotation_weights(chosen, class_weights, model);
    std::ostringstream csv;
    content::write_weights_csv(rows, csv);
    write_file_atomic(options.out, csv.str());

    RunManifest manifest;
    manifest.subcommand = "weights";
    manifest.arguments = dataset_arguments(options.inputs);
    manifest.arguments["out"] = options.out.string();
    manifest.arguments["raw_ratio"] = options.raw_ratio;
    manifest.arguments["domain"] = options.domain;
    manifest.config = {{"smoothing", smoothing}};
    manifest.inputs = {{"source", options.inputs.source}, {"target", options.inputs.target}};
    manifest.outputs = {options.out};
    write_manifest(manifest, manifest_path_for(options.out));
    log << "wrote " << rows.size() << " " << options.domain << " annotation weights to "
        << options.out.string() << '\n';
    return kSuccess;
  });
}

int cmd_train(const TrainOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    json config = read_config(options.config);
    if (options.seed) config["seed"] = *options.seed;
    const trainer::Experiment experiment =
        trainer::experiment_from_json(config, options.config.parent_path());
    const trainer::TrainReport report = trainer::train(experiment);
    write_file_atomic(options.out, trainer::to_json(report).dump(2) + "\n");

    RunManifest manifest;
    manifest.subcommand = "train";
    manifest.arguments = {{"config", options.config.string()}, {"out", options.out.string()}};
    if (options.seed) manifest.arguments["seed"] = *options.seed;
    manifest.config = trainer::config_to_json(experiment.config);
    manifest.config["toy_spec"] = toy::spec_to_json(experiment.spec);
    manifest.seed = experiment.config.seed;
    manifest.inputs = config_inputs(options.config, config);
    manifest.outputs = {options.out};
    write_manifest(manifest, manifest_path_for(options.out));
    log << trainer::to_string(experiment.config.method) << " seed " << experiment.config.seed
        << ": balanced accuracy " << report.final_metrics.balanced_accuracy << '\n';
    return kSuccess;
  });
}

int cmd_bench(const BenchOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const trainer::BenchGrid grid =
        trainer::bench_grid_from_json(read_config(options.config), options.config.parent_path());
    std::size_t threads = 0;
    if (options.threads) {
      threads = *options.threads;
    } else if (const char* env = std::getenv("CARE_THREADS"); env && *env) {
      try {
        threads = static_cast<std::size_t>(std::stoul(env));
      } catch (const std::exception&) {
        throw ConfigError("CARE_THREADS", "CARE_THREADS must be a non-negative integer");
      }
    }
    const trainer::BenchTable table = trainer::bench(grid, threads);
    const fs::path json_path = options.out_dir / "bench.json";
    const fs::path text_path = options.out_dir / "bench.txt";
    write_file_atomic(json_path, trainer::to_json(table).dump(2) + "\n");
    const std::string text = trainer::to_text(table);
    write_file_atomic(text_path, text);

    RunManifest manifest;
    manifest.subcommand = "bench";
    manifest.arguments = {{"config", options.config.string()}, {"out", options.out_dir.string()}};
    json cells = json::array();
    for (const auto& cell : grid.cells) cells.push_back({{"name", cell.name}, {"overrides", cell.overrides}});
    manifest.config = {{"base", grid.base}, {"seeds", grid.seeds}, {"cells", cells}};
    manifest.inputs = config_inputs(options.config, grid.base);
    manifest.outputs = {json_path, text_path};
    write_manifest(manifest, options.out_dir / "manifest.json");
    log << text;
    return kSuccess;
  });
}

int cmd_verify(const VerifyOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const verify::IdentityReport report =
        verify::identity_report(options.trials, options.seed, options.max_support);
    const std::string body = json(report).dump(2) + "\n";
    if (options.out) {
      write_file_atomic(*options.out, body);
      RunManifest manifest;
      manifest.subcommand = "verify";
      manifest.arguments = {{"trials", options.trials},
                            {"seed", options.seed},
                            {"max_support", options.max_support},
                            {"out", options.out->string()}};
      manifest.seed = options.seed;
      manifest.outputs = {*options.out};
      write_manifest(manifest, manifest_path_for(*options.out));
    } else {
      log << body;
    }
    if (!report.passed()) {
      err << "identity check failed: max discrepancy " << report.max_discrepancy
          << ", equal-appearance discrepancy " << report.max_equal_appearance_discrepancy
          << " (threshold " << report.threshold << ")\n";
      return kAcceptanceFailure;
    }
    if (options.out) {
      log << "identity holds over " << report.trials << " trials (max discrepancy "
          << report.max_discrepancy << ")\n";
    }
    return kSuccess;
  });
}

int cmd_generate(const GenerateOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    json config = read_config(options.config);
    if (options.seed) config["seed"] = *options.seed;
    const trainer::Experiment experiment =
        trainer::experiment_from_json(config, options.config.parent_path());
    const trainer::ExperimentData data = trainer::generate_data(experiment);

    RunManifest manifest;
    manifest.subcommand = "generate";
    manifest.arguments = {{"config", options.config.string()}, {"out", options.out_dir.string()}};
    manifest.config = trainer::config_to_json(experiment.config);
    manifest.config["toy_spec"] = toy::spec_to_json(experiment.spec);
    manifest.seed = experiment.config.seed;
    manifest.inputs = config_inputs(options.config, config);

    auto emit = [&](const std::vector<toy::ToyInstance>& split, Domain domain, const std::string& name) {
      std::ostringstream jsonl;
      annotations::write_jsonl(toy::to_dataset(split, experiment.spec, domain, name + "-"), jsonl);
      std::ostringstream csv;
      toy::write_features_csv(split, csv, name + "-");
      const fs::path jsonl_path = options.out_dir / (name + ".jsonl");
      const fs::path csv_path = options.out_dir / (name + "_features.csv");
      write_file_atomic(jsonl_path, jsonl.str());
      write_file_atomic(csv_path, csv.str());
      manifest.outputs.push_back(jsonl_path);
      manifest.outputs.push_back(csv_path);
    };
    emit(data.source_train, Domain::kSource, "source_train");
    emit(data.target_train, Domain::kTarget, "target_train");
    emit(data.target_test, Domain::kTarget, "target_test");
    write_manifest(manifest, options.out_dir / "manifest.json");
    log << "wrote " << data.source_train.size() << " source, " << data.target_train.size()
        << " target-train and " << data.target_test.size() << " target-test instances to "
        << options.out_dir.string() << '\n';
    return kSuccess;
  });
}

}  // namespace care::cli
