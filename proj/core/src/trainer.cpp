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
#include "care/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

#include "care/config_error.hpp"
#include "care/json_config.hpp"
#include "care/random.hpp"

namespace care::trainer {
namespace {

using nlohmann::json;

// Stream ids for mix_seed; one per independent random source.
enum Stream : std::uint64_t {
  kSourceData = 10,
  kTargetData = 11,
  kTestData = 12,
  kSubsample = 13,
  kInit = 20,
  kBatches = 21,
};

bool uses_source(Method m) { return m != Method::kTargetOnly; }
bool uses_target(Method m) { return m != Method::kSourceOnly; }

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("toy_spec_path", "cannot open toy spec '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("toy_spec_path", "malformed toy spec '" + path.string() + "': " + e.what());
  }
}

std::vector<std::size_t> draw(Rng& rng, std::size_t pool, int count) {
  std::vector<std::size_t> out(static_cast<std::size_t>(std::max(count, 0)));
  for (auto& i : out) i = static_cast<std::size_t>(rng.index(pool));
  return out;
}

WeightedBatch make_batch(const std::vector<toy::ToyInstance>& pool, const std::vector<double>& weights,
                         const std::vector<std::size_t>& picks) {
  WeightedBatch batch;
  batch.instances.reserve(picks.size());
  batch.weights.reserve(picks.size());
  for (std::size_t i : picks) {
    batch.instances.push_back(&pool[i]);
    batch.weights.push_back(weights[i]);
  }
  return batch;
}

content::ClassWeights class_weights_or_unit(const std::vector<std::int64_t>& counts, Domain domain) {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  if (total > 0) return content::inverse_frequency_weights(counts, domain);
  content::ClassWeights unit;
  unit.domain = domain;
  unit.counts = counts;
  unit.weights.assign(counts.size(), 1.0);
  unit.zero_count.assign(counts.size(), true);
  return unit;
}

json optional_vector(const std::vector<std::optional<double>>& values) {
  json out = json::array();
  for (const auto& v : values) out.push_back(v ? json(*v) : json(nullptr));
  return out;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kSourceOnly: return "source_only";
    case Method::kTargetOnly: return "target_only";
    case Method::kMixing: return "mixing";
    case Method::kSeqFt: return "seq_ft";
    case Method::kSMmd: return "s_mmd";
    case Method::kCare: return "care";
  }
  return "care";
}

Method method_from_string(std::string_view name) {
  for (Method m : {Method::kSourceOnly, Method::kTargetOnly, Method::kMixing, Method::kSeqFt,
                   Method::kSMmd, Method::kCare}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("method", "unknown method '" + std::string(name) + "'");
}

void CareConfig::validate() const {
  if (!(lambda >= 0.0)) throw ConfigError("lambda", "lambda must be >= 0");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate", "learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum", "momentum must lie in [0, 1)");
  if (steps < 0) throw ConfigError("steps", "steps must be >= 0");
  if (batch_size < 2) throw ConfigError("batch_size", "batch_size must be >= 2");
  if (!(source_fraction > 0.0 && source_fraction < 1.0)) {
    throw ConfigError("source_fraction", "source_fraction must lie in (0, 1)");
  }
  if (hidden_dim < 1 || embed_dim < 1) throw ConfigError("hidden_dim", "layer widths must be >= 1");
  if (!(init_scale > 0.0)) throw ConfigError("init_scale", "init_scale must be > 0");
  if (log_every < 1) throw ConfigError("log_every", "log_every must be >= 1");
  if (alignment_cap < 0) throw ConfigError("alignment_cap", "alignment_cap must be >= 0");
  if (!(data.target_fraction > 0.0 && data.target_fraction <= 1.0)) {
    throw ConfigError("data.target_fraction", "data.target_fraction must lie in (0, 1]");
  }
  if (uses_source(method) && data.n_source == 0) throw ConfigError("data.n_source", "method needs source data");
  if (uses_target(method) && data.n_target == 0) throw ConfigError("data.n_target", "method needs target data");

  const bool single_domain = method == Method::kSourceOnly || method == Method::kTargetOnly;
  if ((single_domain || method == Method::kSeqFt) && alignment != toy::AlignmentKind::kNone) {
    throw ConfigError("alignment", "alignment needs both domains in one batch; not valid for method '" +
                                       std::string(to_string(method)) + "'");
  }
  if (method == Method::kTargetOnly && use_box_rewt) {
    throw ConfigError("use_box_rewt", "box reweighting only applies to source instances");
  }
  if (method == Method::kSMmd && alignment != toy::AlignmentKind::kMmd) {
    throw ConfigError("alignment", "method 's_mmd' uses mmd alignment");
  }
}

Experiment experiment_from_json(const json& config, const std::filesystem::path& base_dir) {
  ObjectReader reader(config, "");
  Experiment ex;
  CareConfig& c = ex.config;
  c.method = method_from_string(reader.get<std::string>("method", "care"));
  const bool care = c.method == Method::kCare;
  c.use_class_rewt = reader.get<bool>("use_class_rewt", care);
  c.use_box_rewt = reader.get<bool>("use_box_rewt", care);
  const std::string default_alignment =
      care ? "cycle" : (c.method == Method::kSMmd ? "mmd" : "none");
  try {
    c.alignment = toy::alignment_kind_from_string(reader.get<std::string>("alignment", default_alignment));
  } catch (const std::invalid_argument& e) {
    throw ConfigError("alignment", e.what());
  }
  c.lambda = reader.get<double>("lambda", c.lambda);
  c.learning_rate = reader.get<double>("learning_rate", c.learning_rate);
  c.momentum = reader.get<double>("momentum", c.momentum);
  c.steps = reader.get<int>("steps", c.steps);
  c.batch_size = reader.get<int>("batch_size", c.batch_size);
  c.source_fraction = reader.get<double>("source_fraction", c.source_fraction);
  c.symmetric_alignment = reader.get<bool>("symmetric_alignment", c.symmetric_alignment);
  c.alignment_cap = reader.get<int>("alignment_cap", c.alignment_cap);
  c.hidden_dim = reader.get<int>("hidden_dim", c.hidden_dim);
  c.embed_dim = reader.get<int>("embed_dim", c.embed_dim);
  c.init_scale = reader.get<double>("init_scale", c.init_scale);
  c.log_every = reader.get<int>("log_every", c.log_every);
  c.seed = reader.get<std::uint64_t>("seed", c.seed);

  if (reader.has("box_smoothing")) {
    ObjectReader s(reader.raw("box_smoothing"), "box_smoothing");
    c.smoothing.alpha = s.get<double>("alpha", c.smoothing.alpha);
    c.smoothing.beta = s.get<double>("beta", c.smoothing.beta);
    c.smoothing.tau = s.get<double>("tau", c.smoothing.tau);
    c.smoothing.floor = s.get<double>("floor", c.smoothing.floor);
    c.smoothing.raw_ratio = s.get<bool>("raw_ratio", c.smoothing.raw_ratio);
    s.finish();
  }
  if (reader.has("data")) {
    ObjectReader d(reader.raw("data"), "data");
    c.data.n_source = d.get<std::size_t>("n_source", c.data.n_source);
    c.data.n_target = d.get<std::size_t>("n_target", c.data.n_target);
    c.data.target_fraction = d.get<double>("target_fraction", c.data.target_fraction);
    c.data.n_target_test = d.get<std::size_t>("n_target_test", c.data.n_target_test);
    d.finish();
  }

  const bool inline_spec = reader.has("toy_spec");
  const bool spec_path = reader.has("toy_spec_path");
  if (inline_spec == spec_path) {
    throw ConfigError("toy_spec", "config needs exactly one of 'toy_spec' or 'toy_spec_path'");
  }
  if (inline_spec) {
    ex.spec = toy::spec_from_json(reader.raw("toy_spec"));
  } else {
    std::filesystem::path path = reader.require<std::string>("toy_spec_path");
    if (path.is_relative()) path = base_dir / path;
    ex.spec = toy::spec_from_json(read_json_file(path));
  }
  reader.finish();
  c.validate();
  return ex;
}

json config_to_json(const CareConfig& c) {
  return {{"method", std::string(to_string(c.method))},
          {"lambda", c.lambda},
          {"learning_rate", c.learning_rate},
          {"momentum", c.momentum},
          {"steps", c.steps},
          {"batch_size", c.batch_size},
          {"source_fraction", c.source_fraction},
          {"use_class_rewt", c.use_class_rewt},
          {"use_box_rewt", c.use_box_rewt},
          {"alignment", std::string(toy::to_string(c.alignment))},
          {"symmetric_alignment", c.symmetric_alignment},
          {"alignment_cap", c.alignment_cap},
          {"hidden_dim", c.hidden_dim},
          {"embed_dim", c.embed_dim},
          {"init_scale", c.init_scale},
          {"log_every", c.log_every},
          {"seed", c.seed},
          {"box_smoothing", c.smoothing},
          {"data",
           {{"n_source", c.data.n_source},
            {"n_target", c.data.n_target},
            {"target_fraction", c.data.target_fraction},
            {"n_target_test", c.data.n_target_test}}}};
}

ExperimentData generate_data(const Experiment& experiment) {
  const CareConfig& c = experiment.config;
  const toy::ToyDomainSpec& spec = experiment.spec;
  ExperimentData data;
  data.source_train =
      toy::generate_domain(spec, Domain::kSource, c.data.n_source, mix_seed(c.seed, kSourceData));
  data.target_pool =
      toy::generate_domain(spec, Domain::kTarget, c.data.n_target, mix_seed(c.seed, kTargetData));
  data.target_test =
      toy::generate_domain(spec, Domain::kTarget, c.data.n_target_test, mix_seed(c.seed, kTestData));
  if (!data.target_pool.empty()) {
    const auto pool = toy::to_dataset(data.target_pool, spec, Domain::kTarget);
    const auto kept = annotations::subsample(pool, c.data.target_fraction, mix_seed(c.seed, kSubsample));
    for (const auto& image : kept.images) {
      data.target_train.push_back(data.target_pool[std::stoul(image.image_id)]);
    }
  }
  return data;
}

TrainingWeights compute_weights(const CareConfig& config, const toy::ToyDomainSpec& spec,
                                std::span<const toy::ToyInstance> source_train,
                                std::span<const toy::ToyInstance> target_train) {
  const auto source_ds = toy::to_dataset(source_train, spec, Domain::kSource, "s");
  const auto target_ds = toy::to_dataset(target_train, spec, Domain::kTarget, "t");
  TrainingWeights w;
  w.source_class = class_weights_or_unit(content::class_counts(source_ds), Domain::kSource);
  w.target_class = class_weights_or_unit(content::class_counts(target_ds), Domain::kTarget);
  w.box_model = content::fit_box_ratio_model(source_ds, target_ds, config.smoothing);
  w.source_instance.reserve(source_train.size());
  for (const toy::ToyInstance& inst : source_train) {
    const auto c = static_cast<std::size_t>(inst.box.class_id);
    double weight = 1.0;
    if (config.use_class_rewt) weight *= w.source_class[c];
    if (config.use_box_rewt) weight *= w.box_model.weight(inst.box);
    w.source_instance.push_back(weight);
  }
  for (const toy::ToyInstance& inst : target_train) {
    const auto c = static_cast<std::size_t>(inst.box.class_id);
    w.target_instance.push_back(config.use_class_rewt ? w.target_class[c] : 1.0);
  }
  return w;
}

toy::ObjectiveResult care_objective(const toy::ToyModel& model, const WeightedBatch& source,
                                    const WeightedBatch& target, double lambda,
                                    toy::AlignmentKind alignment,
                                    const alignment::AlignmentOptions& align) {
  std::vector<toy::WeightedInstance> batch;
  batch.reserve(source.instances.size() + target.instances.size());
  for (std::size_t i = 0; i < source.instances.size(); ++i) {
    batch.push_back({source.instances[i], source.weights[i]});
  }
  for (std::size_t i = 0; i < target.instances.size(); ++i) {
    batch.push_back({target.instances[i], target.weights[i]});
  }
  toy::ObjectiveOptions options;
  options.lambda = lambda;
  options.alignment = alignment;
  options.align = align;
  return toy::model_gradients(model, batch, options);
}

TrainReport train(const CareConfig& config, const toy::ToyDomainSpec& spec, const ExperimentData& data,
                  const StepObserver& observer) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  if (uses_source(config.method) && data.source_train.empty()) {
    throw std::invalid_argument("train: method needs source training data");
  }
  if (uses_target(config.method) && data.target_train.empty()) {
    throw std::invalid_argument("train: method needs target training data");
  }

  const TrainingWeights weights = compute_weights(config, spec, data.source_train, data.target_train);
  toy::ToyModel model = toy::ToyModel::random(spec.raw_dim, config.hidden_dim, config.embed_dim,
                                              spec.num_classes, mix_seed(config.seed, kInit),
                                              config.init_scale);
  Rng rng(mix_seed(config.seed, kBatches));
  toy::Vector velocity = toy::Vector::Zero(model.parameter_count());

  alignment::AlignmentOptions align;
  align.symmetric = config.symmetric_alignment;
  align.max_per_class = config.alignment_cap;

  const int n_source_mixed =
      std::clamp(static_cast<int>(std::lround(config.batch_size * config.source_fraction)), 1,
                 config.batch_size - 1);
  const int seq_switch = config.steps / 2;

  TrainReport report;
  report.config = config;
  for (int step = 0; step < config.steps; ++step) {
    int n_source = n_source_mixed;
    int n_target = config.batch_size - n_source_mixed;
    switch (config.method) {
      case Method::kSourceOnly: n_source = config.batch_size, n_target = 0; break;
      case Method::kTargetOnly: n_source = 0, n_target = config.batch_size; break;
      case Method::kSeqFt:
        if (step < seq_switch) {
          n_source = config.batch_size, n_target = 0;
        } else {
          n_source = 0, n_target = config.batch_size;
          if (step == seq_switch) velocity.setZero();  // fresh optimizer for finetuning
        }
        break;
      default: break;
    }
    const WeightedBatch source_batch =
        make_batch(data.source_train, weights.source_instance, draw(rng, data.source_train.size(), n_source));
    const WeightedBatch target_batch =
        make_batch(data.target_train, weights.target_instance, draw(rng, data.target_train.size(), n_target));

    const toy::ObjectiveResult objective =
        care_objective(model, source_batch, target_batch, config.lambda, config.alignment, align);
    velocity = config.momentum * velocity + objective.gradients.pack();
    model.unpack(model.pack() - config.learning_rate * velocity);

    if (step % config.log_every == 0 || step + 1 == config.steps) {
      report.loss_curve.push_back({step, objective.terms});
    }
    if (observer) observer(step, model);
  }

  report.final_metrics = toy::evaluate(model, data.target_test);
  const toy::EvalMetrics& m = report.final_metrics;
  double n_test = 0.0;
  for (std::size_t c = 0; c < m.per_class_count.size(); ++c) {
    const auto count = static_cast<double>(m.per_class_count[c]);
    n_test += count;
    report.target_risk_weighted += weights.target_class[c] * count * m.per_class_det_loss[c];
  }
  if (n_test > 0.0) report.target_risk_weighted /= n_test;
  report.target_risk_unweighted = m.mean_det_loss;

  report.n_source_train = data.source_train.size();
  report.n_target_train = data.target_train.size();
  report.n_target_test = data.target_test.size();

  std::vector<double> v;
  for (const auto& inst : data.source_train) v.push_back(weights.box_model.weight(inst.box));
  json box_summary = nullptr;
  if (!v.empty()) {
    box_summary = {{"min", *std::min_element(v.begin(), v.end())},
                   {"median", median(v)},
                   {"max", *std::max_element(v.begin(), v.end())}};
  }
  report.statistics = {{"fitted_on", "training_split"},
                       {"test_split_used", false},
                       {"source_class_weights", weights.source_class},
                       {"target_class_weights", weights.target_class},
                       {"source_box_ratio", box_summary}};
  report.wall_time_seconds = seconds_since(start);
  return report;
}

TrainReport train(const Experiment& experiment, const StepObserver& observer) {
  const ExperimentData data = generate_data(experiment);
  return train(experiment.config, experiment.spec, data, observer);
}

json to_json(const TrainReport& r) {
  json steps = json::array(), source = json::array(), target = json::array(),
       align = json::array(), total = json::array();
  for (const StepLog& s : r.loss_curve) {
    steps.push_back(s.step);
    source.push_back(s.terms.source_det);
    target.push_back(s.terms.target_det);
    align.push_back(s.terms.alignment);
    total.push_back(s.terms.total);
  }
  const toy::EvalMetrics& m = r.final_metrics;
  return {{"schema", "care.train_report"},
          {"schema_version", 1},
          {"config", config_to_json(r.config)},
          {"seed", r.config.seed},
          {"data",
           {{"source_train", r.n_source_train},
            {"target_train", r.n_target_train},
            {"target_test", r.n_target_test}}},
          {"statistics", r.statistics},
          {"loss_curve",
           {{"step", steps}, {"source_det", source}, {"target_det", target}, {"alignment", align}, {"total", total}}},
          {"final",
           {{"accuracy", m.accuracy},
            {"balanced_accuracy", m.balanced_accuracy},
            {"per_class_accuracy", optional_vector(m.per_class_accuracy)},
            {"per_class_count", m.per_class_count},
            {"mean_box_smooth_l1", m.mean_box_loss},
            {"target_risk_unweighted", r.target_risk_unweighted},
            {"target_risk_weighted", r.target_risk_weighted}}},
          {"wall_time_seconds", r.wall_time_seconds}};
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::vector<BenchCell> ablation_cells() {
  return {
      {"mixing", {{"method", "mixing"}}},
      {"mixing+S-MMD", {{"method", "s_mmd"}}},
      {"mixing+cycle", {{"method", "mixing"}, {"alignment", "cycle"}}},
      {"mixing+P(C)", {{"method", "mixing"}, {"use_class_rewt", true}}},
      {"mixing+cycle+P(C)", {{"method", "mixing"}, {"alignment", "cycle"}, {"use_class_rewt", true}}},
      {"CARE", {{"method", "care"}}},
  };
}

BenchGrid bench_grid_from_json(const json& config, const std::filesystem::path& base_dir) {
  ObjectReader reader(config, "");
  BenchGrid grid;
  grid.base_dir = base_dir;
  grid.base = reader.raw("base");
  if (!grid.base.is_object()) throw ConfigError("base", "'base' must be a JSON object");
  grid.seeds = reader.get<std::vector<std::uint64_t>>("seeds", {0, 1, 2, 3, 4});
  if (grid.seeds.empty()) throw ConfigError("seeds", "'seeds' must not be empty");
  if (reader.has("cells")) {
    const json& cells = reader.raw("cells");
    if (!cells.is_array() || cells.empty()) throw ConfigError("cells", "'cells' must be a non-empty array");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      ObjectReader cell(cells[i], "cells[" + std::to_string(i) + "]");
      BenchCell c;
      c.name = cell.require<std::string>("name");
      c.overrides = cell.get<json>("overrides", json::object());
      cell.finish();
      grid.cells.push_back(std::move(c));
    }
  } else {
    grid.cells = ablation_cells();
  }
  reader.finish();
  // Parse every cell once up front so config errors surface before any run.
  for (const BenchCell& cell : grid.cells) {
    json merged = grid.base;
    merged.merge_patch(cell.overrides);
    experiment_from_json(merged, base_dir);
  }
  return grid;
}

BenchTable bench(const BenchGrid& grid, std::size_t threads) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<Experiment> experiments;
  for (const BenchCell& cell : grid.cells) {
    json merged = grid.base;
    merged.merge_patch(cell.overrides);
    experiments.push_back(experiment_from_json(merged, grid.base_dir));
  }
  const std::size_t n_seeds = grid.seeds.size();
  const std::size_t jobs = experiments.size() * n_seeds;
  std::vector<toy::EvalMetrics> results(jobs);

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t job = next++; job < jobs; job = next++) {
      try {
        Experiment ex = experiments[job / n_seeds];
        ex.config.seed = grid.seeds[job % n_seeds];
        results[job] = train(ex).final_metrics;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(jobs, 1));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  BenchTable table;
  table.seeds = grid.seeds;
  for (std::size_t c = 0; c < experiments.size(); ++c) {
    CellSummary summary;
    summary.name = grid.cells[c].name;
    summary.config = config_to_json(experiments[c].config);
    summary.config.erase("seed");
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const toy::EvalMetrics& m = results[c * n_seeds + s];
      summary.balanced_accuracy.push_back(m.balanced_accuracy);
      summary.accuracy.push_back(m.accuracy);
      summary.mean_box_loss.push_back(m.mean_box_loss);
    }
    summary.median = median(summary.balanced_accuracy);
    summary.min = *std::min_element(summary.balanced_accuracy.begin(), summary.balanced_accuracy.end());
    summary.max = *std::max_element(summary.balanced_accuracy.begin(), summary.balanced_accuracy.end());
    table.cells.push_back(std::move(summary));
  }
  table.wall_time_seconds = seconds_since(start);
  return table;
}

json to_json(const BenchTable& table) {
  json cells = json::array();
  for (const CellSummary& c : table.cells) {
    cells.push_back({{"name", c.name},
                     {"config", c.config},
                     {"balanced_accuracy",
                      {{"per_seed", c.balanced_accuracy}, {"median", c.median}, {"min", c.min}, {"max", c.max}}},
                     {"accuracy", {{"per_seed", c.accuracy}, {"median", median(c.accuracy)}}},
                     {"mean_box_smooth_l1", {{"per_seed", c.mean_box_loss}, {"median", median(c.mean_box_loss)}}}});
  }
  return {{"schema", "care.bench_table"},
          {"schema_version", 1},
          {"metric", "target_balanced_accuracy"},
          {"seeds", table.seeds},
          {"cells", cells},
          {"wall_time_seconds", table.wall_time_seconds}};
}

std::string to_text(const BenchTable& table) {
  std::size_t name_width = 4;
  for (const CellSummary& c : table.cells) name_width = std::max(name_width, c.name.size());
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << std::left << std::setw(static_cast<int>(name_width)) << "cell" << std::right;
  for (const char* col : {"median", "min", "max"}) out << "  " << std::setw(8) << col;
  for (std::uint64_t seed : table.seeds) out << "  " << std::setw(8) << ("s" + std::to_string(seed));
  out << '\n';
  for (const CellSummary& c : table.cells) {
    out << std::left << std::setw(static_cast<int>(name_width)) << c.name << std::right;
    for (double v : {c.median, c.min, c.max}) out << "  " << std::setw(8) << v;
    for (double v : c.balanced_accuracy) out << "  " << std::setw(8) << v;
    out << '\n';
  }
  return out.str();
}

}  // namespace care::trainer
