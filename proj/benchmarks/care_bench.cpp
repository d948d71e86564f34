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
#include <benchmark/benchmark.h>

#include <vector>

#include "care/alignment.hpp"
#include "care/kde.hpp"
#include "care/random.hpp"
#include "care/toy_detect.hpp"

namespace {

using namespace care;

std::vector<content::Point2> sample_points(std::size_t n) {
  Rng rng(1);
  std::vector<content::Point2> pts(n);
  for (auto& p : pts) p = {rng.normal(0.4, 0.1), rng.normal(0.5, 0.2)};
  return pts;
}

alignment::Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  alignment::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

void BM_KdeFit(benchmark::State& state) {
  const auto pts = sample_points(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(content::GaussianKde2d::fit(pts));
}
BENCHMARK(BM_KdeFit)->Arg(100)->Arg(1000)->Arg(10000);

void BM_KdeLogPdf(benchmark::State& state) {
  const auto kde = content::GaussianKde2d::fit(sample_points(static_cast<std::size_t>(state.range(0))));
  const content::Point2 probe{0.45, 0.55};
  for (auto _ : state) benchmark::DoNotOptimize(kde.log_pdf(probe));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KdeLogPdf)->Arg(100)->Arg(1000)->Arg(10000);

void BM_CycleLoss(benchmark::State& state) {
  Rng rng(2);
  const auto k = state.range(0), d = state.range(1);
  const auto s = random_matrix(rng, k, d), t = random_matrix(rng, k, d);
  for (auto _ : state) benchmark::DoNotOptimize(alignment::cycle_consistency_loss(s, t));
}
BENCHMARK(BM_CycleLoss)->Args({8, 16})->Args({32, 64})->Args({128, 256});

void BM_LinearMmd(benchmark::State& state) {
  Rng rng(3);
  const auto k = state.range(0), d = state.range(1);
  const auto s = random_matrix(rng, k, d), t = random_matrix(rng, k, d);
  for (auto _ : state) benchmark::DoNotOptimize(alignment::linear_mmd(s, t));
}
BENCHMARK(BM_LinearMmd)->Args({32, 64})->Args({128, 256});

void BM_TrainStep(benchmark::State& state) {
  toy::ToyDomainSpec spec;
  spec.num_classes = 4;
  spec.class_names = {"a", "b", "c", "d"};
  spec.class_dim = 4;
  spec.raw_dim = 16;
  Rng rng(4);
  spec.prototypes = random_matrix(rng, 4, 4);
  for (auto* domain : {&spec.source, &spec.target}) {
    domain->class_probs = {0.4, 0.3, 0.2, 0.1};
    domain->boxes.assign(4, toy::BoxDistribution{});
    domain->appearance.transform = random_matrix(rng, 16, spec.latent_dim());
    domain->appearance.offset = toy::Vector::Zero(16);
  }
  spec.validate();
  const auto half = static_cast<std::size_t>(state.range(0) / 2);
  const auto source = toy::generate_domain(spec, Domain::kSource, half, 5);
  const auto target = toy::generate_domain(spec, Domain::kTarget, half, 6);
  std::vector<toy::WeightedInstance> batch;
  for (const auto& x : source) batch.push_back(toy::WeightedInstance{&x, 1.0});
  for (const auto& x : target) batch.push_back(toy::WeightedInstance{&x, 1.0});
  const auto model = toy::ToyModel::random(16, 32, 8, 4, 7);
  toy::ObjectiveOptions options;
  options.lambda = 0.5;
  options.alignment = toy::AlignmentKind::kCycle;
  for (auto _ : state) benchmark::DoNotOptimize(toy::model_gradients(model, batch, options));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainStep)->Arg(32)->Arg(128);

}  // namespace

BENCHMARK_MAIN();
