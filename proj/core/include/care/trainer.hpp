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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "care/content_stats.hpp"
#include "care/toy_detect.hpp"

namespace care::trainer {

enum class Method { kSourceOnly, kTargetOnly, kMixing, kSeqFt, kSMmd, kCare };

std::string_view to_string(Method method);
Method method_from_string(std::string_view name);

struct DataConfig {
  std::size_t n_source = 2000;
  std::size_t n_target = 400;        // target training pool before subsampling
  double target_fraction = 0.25;     // image-level subsample of the pool
  std::size_t n_target_test = 2000;  // held out, never used for training or statistics
};

struct CareConfig {
  Method method = Method::kCare;
  double lambda = 0.1;
  double learning_rate = 0.05;
  double momentum = 0.9;
  int steps = 2000;
  int batch_size = 32;
  double source_fraction = 0.5;  // within-batch source share; 0.5 is 1:1

  bool use_class_rewt = true;
  bool use_box_rewt = true;
  toy::AlignmentKind alignment = toy::AlignmentKind::kCycle;
  bool symmetric_alignment = false;
  int alignment_cap = 0;  // 0: all same-class instances in the batch

  int hidden_dim = 32;
  int embed_dim = 8;
  double init_scale = 1.0;
  int log_every = 10;
  std::uint64_t seed = 0;

  content::SmoothingParams smoothing;
  DataConfig data;

  /// Throws ConfigError on out-of-range values or inconsistent toggles.
  void validate() const;
};

struct Experiment {
  CareConfig config;
  toy::ToyDomainSpec spec;
};

/// Parses a training config. Keys absent from the file take defaults; the
/// reweighting and alignment toggles default per method (care: all on,
/// s_mmd: mmd alignment, others: all off). Unknown keys raise ConfigError.
/// `toy_spec_path` is resolved against base_dir.
Experiment experiment_from_json(const nlohmann::json& config,
                                const std::filesystem::path& base_dir = {});

nlohmann::json config_to_json(const CareConfig& config);

/// Generated splits for one seed.
struct ExperimentData {
  std::vector<toy::ToyInstance> source_train;
  std::vector<toy::ToyInstance> target_pool;
  std::vector<toy::ToyInstance> target_train;  // subsample of target_pool
  std::vector<toy::ToyInstance> target_test;
};

ExperimentData generate_data(const Experiment& experiment);

/// Offline statistics fitted on the training splits only.
struct TrainingWeights {
  content::ClassWeights source_class;
  content::ClassWeights target_class;
  content::BoxRatioModel box_model;
  std::vector<double> source_instance;  // w_S(C) * v(B|C) as enabled
  std::vector<double> target_instance;  // w_T(C) as enabled
};

TrainingWeights compute_weights(const CareConfig& config, const toy::ToyDomainSpec& spec,
                                std::span<const toy::ToyInstance> source_train,
                                std::span<const toy::ToyInstance> target_train);

struct WeightedBatch {
  std::vector<const toy::ToyInstance*> instances;
  std::vector<double> weights;
};

/// Full objective on one source and one target batch:
///   mean_S[w_S v l_det] + mean_T[w_T l_det] + lambda * l_align.
toy::ObjectiveResult care_objective(const toy::ToyModel& model, const WeightedBatch& source,
                                    const WeightedBatch& target, double lambda,
                                    toy::AlignmentKind alignment,
                                    const alignment::AlignmentOptions& align = {});

struct StepLog {
  int step = 0;
  toy::ObjectiveTerms terms;
};

struct TrainReport {
  CareConfig config;
  std::vector<StepLog> loss_curve;
  toy::EvalMetrics final_metrics;
  double target_risk_unweighted = 0.0;
  double target_risk_weighted = 0.0;  // weighted by training-split w_T(C)
  std::size_t n_source_train = 0;
  std::size_t n_target_train = 0;
  std::size_t n_target_test = 0;
  nlohmann::json statistics;
  double wall_time_seconds = 0.0;
};

/// Called after every optimizer step with the updated parameters.
using StepObserver = std::function<void(int step, const toy::ToyModel& model)>;

/// SGD with momentum on the configured objective; deterministic per seed.
TrainReport train(const CareConfig& config, const toy::ToyDomainSpec& spec,
                  const ExperimentData& data, const StepObserver& observer = {});

/// Generates data from the experiment and trains.
TrainReport train(const Experiment& experiment, const StepObserver& observer = {});

nlohmann::json to_json(const TrainReport& report);

struct BenchCell {
  std::string name;
  nlohmann::json overrides;  // merge-patched onto the base config
};

struct BenchGrid {
  nlohmann::json base;
  std::filesystem::path base_dir;
  std::vector<BenchCell> cells;
  std::vector<std::uint64_t> seeds;
};

/// Rows: mixing; +S-MMD; +cycle; +P(C); +cycle+P(C); full CARE.
std::vector<BenchCell> ablation_cells();

/// Parses {"base": {...}, "seeds": [...], "cells": [...]}; cells default to
/// ablation_cells().
BenchGrid bench_grid_from_json(const nlohmann::json& config, const std::filesystem::path& base_dir = {});

struct CellSummary {
  std::string name;
  nlohmann::json config;
  std::vector<double> balanced_accuracy;  // per seed, in seed order
  std::vector<double> accuracy;
  std::vector<double> mean_box_loss;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct BenchTable {
  std::vector<std::uint64_t> seeds;
  std::vector<CellSummary> cells;
  double wall_time_seconds = 0.0;
};

/// Runs every (cell, seed) pair; cells sharing a seed share data and
/// initialization. `threads` == 0 uses the hardware concurrency.
BenchTable bench(const BenchGrid& grid, std::size_t threads = 1);

nlohmann::json to_json(const BenchTable& table);
std::string to_text(const BenchTable& table);

double median(std::vector<double> values);

}  // namespace care::trainer
