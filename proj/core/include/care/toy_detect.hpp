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

#include <array>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "care/alignment.hpp"
#include "care/annotations.hpp"

namespace care::toy {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using annotations::BoxAnnotation;

/// Per-class box geometry: log-normal (w, h) and Gaussian (cx, cy).
struct BoxDistribution {
  std::array<double, 2> size_log_mean{std::log(0.1), std::log(0.1)};
  std::array<double, 2> size_log_sigma{0.3, 0.3};
  std::array<double, 2> location_mean{0.5, 0.5};
  std::array<double, 2> location_sigma{0.15, 0.15};
};

/// Domain appearance map applied to the latent vector: x = A z + b + noise.
struct Appearance {
  Matrix transform;  // raw_dim x latent_dim
  Vector offset;     // raw_dim
  double noise = 0.1;
};

struct DomainGenerator {
  std::vector<double> class_probs;
  std::vector<BoxDistribution> boxes;  // one per class
  Appearance appearance;
};

// Generative model of a two-domain instance-level detection task. An instance
// draws its class from class_probs (content gap in P(C)), a box from the
// class's BoxDistribution (content gap in P(B|C)), a latent vector made of
// the class prototype plus noise followed by the scaled, centered box, and is
// observed through the domain's Appearance (appearance gap).
struct ToyDomainSpec {
  int num_classes = 2;
  std::vector<std::string> class_names;
  int class_dim = 4;
  int raw_dim = 8;
  double latent_noise = 0.5;
  double box_feature_scale = 2.0;
  Matrix prototypes;  // num_classes x class_dim
  DomainGenerator source;
  DomainGenerator target;

  int latent_dim() const { return class_dim + 4; }
  const DomainGenerator& domain(Domain d) const { return d == Domain::kSource ? source : target; }
  /// Throws std::invalid_argument naming the first broken invariant.
  void validate() const;
};

/// Parses a spec. Unknown keys are rejected (std::invalid_argument naming the
/// key). Matrices may be given explicitly or as {"random": {...}} blocks.
ToyDomainSpec spec_from_json(const nlohmann::json& config);
nlohmann::json spec_to_json(const ToyDomainSpec& spec);

struct ToyInstance {
  Vector features;
  BoxAnnotation box;
  Domain domain = Domain::kSource;
};

std::vector<ToyInstance> generate_domain(const ToyDomainSpec& spec, Domain domain, std::size_t n,
                                         std::uint64_t seed);

/// Pixel size of the synthetic image each instance lives in.
inline constexpr double kToyImageWidth = 2048.0;
inline constexpr double kToyImageHeight = 1024.0;

/// One image per instance, ids "<prefix><index>".
annotations::DetectionDataset to_dataset(std::span<const ToyInstance> instances,
                                         const ToyDomainSpec& spec, Domain domain,
                                         const std::string& prefix = "");

/// Sidecar CSV: image_id,f0,f1,...
void write_features_csv(std::span<const ToyInstance> instances, std::ostream& out,
                        const std::string& prefix = "");

// Encoder (raw -> hidden -> embedding, tanh after both layers) followed by a
// linear classification head (K logits) and a linear box head (4 outputs).
struct ToyModel {
  Matrix enc1_w;
  Vector enc1_b;
  Matrix enc2_w;
  Vector enc2_b;
  Matrix cls_w;
  Vector cls_b;
  Matrix box_w;
  Vector box_b;

  static ToyModel zeros(int raw_dim, int hidden_dim, int embed_dim, int num_classes);
  /// Weights ~ N(0, scale^2 / fan_in), biases zero.
  static ToyModel random(int raw_dim, int hidden_dim, int embed_dim, int num_classes,
                         std::uint64_t seed, double scale = 1.0);

  Eigen::Index parameter_count() const;
  Vector pack() const;
  void unpack(const Vector& flat);
  bool all_finite() const;

  int raw_dim() const { return static_cast<int>(enc1_w.cols()); }
  int embed_dim() const { return static_cast<int>(enc2_w.rows()); }
  int num_classes() const { return static_cast<int>(cls_w.rows()); }
};

using ModelGradients = ToyModel;

struct ForwardResult {
  Vector hidden;
  Vector embedding;
  Vector logits;
  Vector box;
};

ForwardResult forward(const ToyModel& model, const Vector& features);

/// (cx, cy, w, h).
Vector box_target(const BoxAnnotation& box);

double smooth_l1(double diff);
double cls_loss(const Vector& logits, int label);
double box_loss(const Vector& predicted, const BoxAnnotation& box);
/// Cross-entropy plus smooth-L1 summed over the four box coordinates.
double det_loss(const Vector& logits, const Vector& predicted_box, const BoxAnnotation& box);

enum class AlignmentKind { kNone, kCycle, kMmd };

std::string_view to_string(AlignmentKind kind);
AlignmentKind alignment_kind_from_string(std::string_view name);

struct WeightedInstance {
  const ToyInstance* instance = nullptr;
  double weight = 1.0;
};

struct ObjectiveOptions {
  double lambda = 0.0;
  AlignmentKind alignment = AlignmentKind::kNone;
  alignment::AlignmentOptions align;
};

struct ObjectiveTerms {
  double source_det = 0.0;  // mean over source instances of weight * det loss
  double target_det = 0.0;  // mean over target instances of weight * det loss
  double alignment = 0.0;   // unscaled alignment loss
  double total = 0.0;       // source_det + target_det + lambda * alignment
};

struct ObjectiveResult {
  ObjectiveTerms terms;
  ModelGradients gradients;
};

/// Objective value and exact parameter gradients for a mixed-domain batch.
/// Alignment pairs same-class source and target embeddings within the batch.
ObjectiveResult model_gradients(const ToyModel& model, std::span<const WeightedInstance> batch,
                                const ObjectiveOptions& options);

struct EvalMetrics {
  double accuracy = 0.0;
  double balanced_accuracy = 0.0;
  std::vector<std::optional<double>> per_class_accuracy;  // empty for absent classes
  double mean_box_loss = 0.0;
  double mean_det_loss = 0.0;
  std::vector<double> per_class_det_loss;
  std::vector<std::int64_t> per_class_count;
};

EvalMetrics evaluate(const ToyModel& model, std::span<const ToyInstance> instances);

}  // namespace care::toy
