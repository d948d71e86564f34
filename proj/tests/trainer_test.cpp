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

#include <gtest/gtest.h>

#include <cmath>

#include "care/config_error.hpp"
#include "test_util.hpp"
#include "toy_spec_helpers.hpp"

namespace care::trainer {
namespace {

using nlohmann::json;

json small_config(const std::string& method) {
  return {{"method", method},
          {"toy_spec", care::testing::small_spec_json()},
          {"steps", 60},
          {"batch_size", 16},
          {"learning_rate", 0.02},
          {"hidden_dim", 8},
          {"embed_dim", 4},
          {"log_every", 5},
          {"seed", 3},
          {"data", {{"n_source", 300}, {"n_target", 120}, {"target_fraction", 0.5}, {"n_target_test", 200}}}};
}

Experiment parse(const json& j) { return experiment_from_json(j); }

TEST(Config, UnknownKeyNamed) {
  auto j = small_config("care");
  j["lamda"] = 0.3;
  try {
    parse(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "lamda");
    EXPECT_NE(std::string(e.what()).find("lamda"), std::string::npos);
  }
  j = small_config("care");
  j["data"]["n_sorce"] = 3;
  EXPECT_THROW(parse(j), ConfigError);
}

TEST(Config, MethodDefaults) {
  const auto care = parse(small_config("care")).config;
  EXPECT_TRUE(care.use_class_rewt);
  EXPECT_TRUE(care.use_box_rewt);
  EXPECT_EQ(care.alignment, toy::AlignmentKind::kCycle);
  EXPECT_DOUBLE_EQ(care.lambda, 0.1);
  EXPECT_DOUBLE_EQ(care.source_fraction, 0.5);

  const auto mixing = parse(small_config("mixing")).config;
  EXPECT_FALSE(mixing.use_class_rewt);
  EXPECT_FALSE(mixing.use_box_rewt);
  EXPECT_EQ(mixing.alignment, toy::AlignmentKind::kNone);
  EXPECT_EQ(parse(small_config("s_mmd")).config.alignment, toy::AlignmentKind::kMmd);
}

TEST(Config, InvalidCombinationsRejected) {
  auto j = small_config("source_only");
  j["alignment"] = "cycle";
  EXPECT_THROW(parse(j), ConfigError);
  j = small_config("target_only");
  j["use_box_rewt"] = true;
  EXPECT_THROW(parse(j), ConfigError);
  j = small_config("care");
  j["lambda"] = -1.0;
  EXPECT_THROW(parse(j), ConfigError);
  j = small_config("care");
  j["source_fraction"] = 1.0;
  EXPECT_THROW(parse(j), ConfigError);
  j = small_config("mixing");
  j["method"] = "mixup";
  EXPECT_THROW(parse(j), ConfigError);
  j = small_config("care");
  j["toy_spec_path"] = "x.json";
  EXPECT_THROW(parse(j), ConfigError);
}

TEST(Config, RoundTrip) {
  const auto ex = parse(small_config("seq_ft"));
  json j = config_to_json(ex.config);
  j["toy_spec"] = toy::spec_to_json(ex.spec);
  EXPECT_EQ(config_to_json(parse(j).config).dump(), config_to_json(ex.config).dump());
}

TEST(Data, SplitsAreDisjointStreams) {
  const auto ex = parse(small_config("care"));
  const auto data = generate_data(ex);
  EXPECT_EQ(data.source_train.size(), 300u);
  EXPECT_EQ(data.target_pool.size(), 120u);
  EXPECT_EQ(data.target_train.size(), 60u);
  EXPECT_EQ(data.target_test.size(), 200u);
  EXPECT_NE(data.target_pool[0].features, data.target_test[0].features);
}

struct ObjectiveFixture {
  Experiment ex = parse(small_config("care"));
  ExperimentData data = generate_data(ex);
  toy::ToyModel model = toy::ToyModel::random(5, 8, 4, 3, 1);

  WeightedBatch batch(const std::vector<toy::ToyInstance>& pool, std::size_t n, double weight) const {
    WeightedBatch b;
    for (std::size_t i = 0; i < n; ++i) {
      b.instances.push_back(&pool[i]);
      b.weights.push_back(weight);
    }
    return b;
  }
};

TEST(Objective, LambdaZeroUnitWeightsIsMixing) {
  ObjectiveFixture fx;
  const auto s = fx.batch(fx.data.source_train, 8, 1.0);
  const auto t = fx.batch(fx.data.target_train, 8, 1.0);
  const auto care = care_objective(fx.model, s, t, 0.0, toy::AlignmentKind::kCycle);
  const auto mixing = care_objective(fx.model, s, t, 0.0, toy::AlignmentKind::kNone);
  EXPECT_EQ(care.terms.total, mixing.terms.total);
  EXPECT_EQ(care.gradients.pack(), mixing.gradients.pack());
}

TEST(Objective, EmptyTargetBatch) {
  ObjectiveFixture fx;
  const auto s = fx.batch(fx.data.source_train, 8, 1.3);
  const auto r = care_objective(fx.model, s, WeightedBatch{}, 0.5, toy::AlignmentKind::kCycle);
  EXPECT_EQ(r.terms.target_det, 0.0);
  EXPECT_EQ(r.terms.alignment, 0.0);
  EXPECT_EQ(r.terms.total, r.terms.source_det);
}

TEST(Objective, BreakdownAdditive) {
  ObjectiveFixture fx;
  const auto s = fx.batch(fx.data.source_train, 12, 2.0);
  const auto t = fx.batch(fx.data.target_train, 12, 0.7);
  for (auto kind : {toy::AlignmentKind::kCycle, toy::AlignmentKind::kMmd}) {
    const auto r = care_objective(fx.model, s, t, 0.37, kind);
    EXPECT_LT(std::abs(r.terms.source_det + r.terms.target_det + 0.37 * r.terms.alignment - r.terms.total), 1e-12);
  }
}

TEST(Objective, SourceTermIsWeightedMean) {
  ObjectiveFixture fx;
  const auto s = fx.batch(fx.data.source_train, 5, 1.0);
  auto weighted = s;
  double expected = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    weighted.weights[i] = 0.5 + static_cast<double>(i);
    const auto f = toy::forward(fx.model, s.instances[i]->features);
    expected += weighted.weights[i] * toy::det_loss(f.logits, f.box, s.instances[i]->box);
  }
  const auto r = care_objective(fx.model, weighted, WeightedBatch{}, 0.0, toy::AlignmentKind::kNone);
  EXPECT_NEAR(r.terms.source_det, expected / 5.0, 1e-13);
}

std::vector<Eigen::VectorXd> trajectory(const Experiment& ex) {
  std::vector<Eigen::VectorXd> out;
  train(ex, [&](int, const toy::ToyModel& m) { out.push_back(m.pack()); });
  return out;
}

TEST(Train, CareWithUnitWeightsAndZeroLambdaFollowsMixing) {
  auto care_json = small_config("care");
  care_json["use_class_rewt"] = false;
  care_json["use_box_rewt"] = false;
  care_json["lambda"] = 0.0;
  const auto care = trajectory(parse(care_json));
  const auto mixing = trajectory(parse(small_config("mixing")));
  ASSERT_EQ(care.size(), mixing.size());
  for (std::size_t s = 0; s < care.size(); ++s) {
    EXPECT_LE((care[s] - mixing[s]).cwiseAbs().maxCoeff(), 1e-12) << "step " << s;
  }
}

TEST(Train, SeqFtSwitchMatchesSourceOnly) {
  const auto seq = trajectory(parse(small_config("seq_ft")));
  auto src_json = small_config("source_only");
  src_json["steps"] = 30;
  const auto src = trajectory(parse(src_json));
  ASSERT_EQ(src.size(), 30u);
  EXPECT_EQ(seq[29], src.back());
  EXPECT_NE(seq[30], seq[29]);
}

TEST(Train, DeterministicApartFromWallTime) {
  const auto ex = parse(small_config("care"));
  json a = to_json(train(ex)), b = to_json(train(ex));
  a.erase("wall_time_seconds");
  b.erase("wall_time_seconds");
  EXPECT_EQ(a.dump(), b.dump());
}

TEST(Train, ReportContract) {
  const auto report = train(parse(small_config("care")));
  const auto& m = report.final_metrics;
  double sum = 0.0;
  int present = 0;
  for (const auto& a : m.per_class_accuracy) {
    if (a) sum += *a, ++present;
  }
  EXPECT_NEAR(m.balanced_accuracy, sum / present, 1e-15);
  EXPECT_EQ(report.loss_curve.front().step, 0);
  EXPECT_EQ(report.loss_curve.back().step, 59);
  EXPECT_EQ(report.loss_curve.size(), 13u);
  EXPECT_EQ(report.statistics["fitted_on"], "training_split");
  EXPECT_EQ(report.statistics["test_split_used"], false);
  const json j = to_json(report);
  EXPECT_EQ(j["schema"], "care.train_report");
  EXPECT_TRUE(j.contains("wall_time_seconds"));
}

TEST(Train, TestSplitDoesNotInfluenceTraining) {
  auto a_json = small_config("care");
  auto b_json = small_config("care");
  b_json["data"]["n_target_test"] = 50;
  EXPECT_EQ(trajectory(parse(a_json)).back(), trajectory(parse(b_json)).back());
}

TEST(Train, ClassWeightsEqualizePerClassMass) {
  const auto ex = parse(small_config("care"));
  const auto data = generate_data(ex);
  const auto w = compute_weights(ex.config, ex.spec, data.source_train, data.target_train);
  // One pass over each training split: sum of class weights per class.
  for (const auto* split : {&data.source_train, &data.target_train}) {
    const auto& weights = split == &data.source_train ? w.source_class : w.target_class;
    std::vector<double> mass(3, 0.0);
    for (const auto& inst : *split) mass[inst.box.class_id] += weights[inst.box.class_id];
    const double expected = static_cast<double>(split->size()) / 3.0;
    for (double m : mass) EXPECT_NEAR(m, expected, 0.02 * expected);
  }
}

// Multinomial logistic regression by full-batch gradient descent: an
// independent check that the fixture is linearly separable.
double logistic_regression_accuracy(const std::vector<toy::ToyInstance>& train_set,
                                    const std::vector<toy::ToyInstance>& test_set, int k) {
  const auto d = train_set[0].features.size();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(k, d + 1);
  for (int it = 0; it < 500; ++it) {
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, d + 1);
    for (const auto& inst : train_set) {
      Eigen::VectorXd x(d + 1);
      x << inst.features, 1.0;
      Eigen::VectorXd z = w * x;
      z = (z.array() - z.maxCoeff()).exp();
      z /= z.sum();
      z[inst.box.class_id] -= 1.0;
      g += z * x.transpose();
    }
    w -= 0.5 / static_cast<double>(train_set.size()) * g;
  }
  std::vector<int> hits(k, 0), counts(k, 0);
  for (const auto& inst : test_set) {
    Eigen::VectorXd x(d + 1);
    x << inst.features, 1.0;
    Eigen::Index pred;
    (w * x).maxCoeff(&pred);
    ++counts[inst.box.class_id];
    hits[inst.box.class_id] += pred == inst.box.class_id;
  }
  double sum = 0.0;
  int present = 0;
  for (int c = 0; c < k; ++c) {
    if (counts[c]) sum += static_cast<double>(hits[c]) / counts[c], ++present;
  }
  return sum / present;
}

TEST(Train, TargetOnlySeparable) {
  auto j = small_config("target_only");
  j["toy_spec"]["latent_noise"] = 0.2;
  j["steps"] = 2000;
  j["learning_rate"] = 0.05;
  const auto ex = parse(j);
  const auto data = generate_data(ex);
  ASSERT_GT(logistic_regression_accuracy(data.target_train, data.target_test, 3), 0.9);
  EXPECT_GT(train(ex.config, ex.spec, data).final_metrics.balanced_accuracy, 0.9);
}

TEST(Bench, OneCellMatchesDirectTrain) {
  BenchGrid grid;
  grid.base = small_config("care");
  grid.seeds = {3, 4};
  grid.cells = {{"only", json::object()}};
  const auto table = bench(grid, 2);
  ASSERT_EQ(table.cells.size(), 1u);
  for (std::size_t s = 0; s < 2; ++s) {
    auto j = small_config("care");
    j["seed"] = grid.seeds[s];
    EXPECT_EQ(table.cells[0].balanced_accuracy[s], train(parse(j)).final_metrics.balanced_accuracy);
  }
  const auto& c = table.cells[0];
  EXPECT_EQ(c.min, std::min(c.balanced_accuracy[0], c.balanced_accuracy[1]));
  EXPECT_EQ(c.max, std::max(c.balanced_accuracy[0], c.balanced_accuracy[1]));
  EXPECT_DOUBLE_EQ(c.median, 0.5 * (c.balanced_accuracy[0] + c.balanced_accuracy[1]));
}

TEST(Bench, ThreadCountDoesNotChangeResults) {
  BenchGrid grid;
  grid.base = small_config("mixing");
  grid.seeds = {0, 1, 2};
  grid.cells = ablation_cells();
  json a = to_json(bench(grid, 1)), b = to_json(bench(grid, 4));
  a.erase("wall_time_seconds");
  b.erase("wall_time_seconds");
  EXPECT_EQ(a.dump(), b.dump());
  const auto text = to_text(bench(grid, 2));
  // Rows keep grid order.
  EXPECT_LT(text.find("mixing+S-MMD"), text.find("mixing+cycle"));
  EXPECT_LT(text.find("mixing+cycle+P(C)"), text.find("CARE"));
}

TEST(Bench, GridParsing) {
  json g = {{"base", small_config("mixing")}};
  const auto grid = bench_grid_from_json(g);
  EXPECT_EQ(grid.cells.size(), 6u);
  EXPECT_EQ(grid.seeds, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
  g["cells"] = json::array({{{"name", "x"}, {"overrides", {{"lamda", 1}}}}});
  EXPECT_THROW(bench_grid_from_json(g), ConfigError);
}

TEST(Median, OddAndEven) {
  EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
  EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
}

}  // namespace
}  // namespace care::trainer
