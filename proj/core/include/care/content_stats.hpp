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
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "care/annotations.hpp"
#include "care/kde.hpp"

namespace care::content {

using annotations::BoxAnnotation;
using annotations::DetectionDataset;

/// Number of annotations per class id.
std::vector<std::int64_t> class_counts(const DetectionDataset& dataset);

// Inverse-frequency class weights normalized so that a uniform class
// distribution gets weight 1: w[c] = N_total / (K * N[c]). Classes with no
// annotations keep weight 1 and are flagged.
struct ClassWeights {
  Domain domain = Domain::kSource;
  std::vector<double> weights;
  std::vector<std::int64_t> counts;
  std::vector<bool> zero_count;

  double operator[](std::size_t c) const { return weights[c]; }
  std::size_t size() const { return weights.size(); }
  std::int64_t total() const;
};

/// Throws std::invalid_argument when every count is zero (or counts is empty).
ClassWeights inverse_frequency_weights(std::span<const std::int64_t> counts,
                                       Domain domain = Domain::kSource);

struct SmoothingParams {
  double alpha = 20.0;
  double beta = -9.0;
  double tau = 0.1;  // compared against P_T(w,h|C) * P_T(x,y|C)
  double floor = 1.0;
  // Return the unsmoothed, unthresholded density ratio instead.
  bool raw_ratio = false;
};

double sigmoid(double x);

/// alpha * sigmoid(r) + beta, kept strictly below alpha + beta.
double smooth_ratio(double ratio, const SmoothingParams& params);

enum class RatioStatus {
  kSmoothed,        // target support above tau, smoothing applied
  kRaw,             // raw_ratio mode
  kBelowThreshold,  // target support at or below tau, floor returned
  kFlaggedClass,    // class missing from a domain, floor returned
};

std::string_view to_string(RatioStatus status);

struct RatioEvaluation {
  double weight = 1.0;
  double raw_ratio = 1.0;
  double log_raw_ratio = 0.0;
  double log_target_density = 0.0;
  RatioStatus status = RatioStatus::kFlaggedClass;
};

// Class-conditional box density ratio
//   r = [P_T(w,h|C) / P_S(w,h|C)] * [P_T(x,y|C) / P_S(x,y|C)]
// with each factor estimated by a Gaussian KDE. The ratio is formed in log
// space, then smoothed and thresholded.
class BoxRatioModel {
 public:
  BoxRatioModel() = default;
  BoxRatioModel(ConditionalKde size_source, ConditionalKde size_target, ConditionalKde loc_source,
                ConditionalKde loc_target, SmoothingParams smoothing);

  RatioEvaluation evaluate(const BoxAnnotation& box) const;
  double weight(const BoxAnnotation& box) const { return evaluate(box).weight; }

  /// log r before smoothing; 0 for flagged classes.
  double log_raw_ratio(const BoxAnnotation& box) const;

  bool flagged(std::size_t class_id) const;
  std::size_t num_classes() const { return size_source_.num_classes(); }

  const ConditionalKde& size_kde(Domain domain) const;
  const ConditionalKde& location_kde(Domain domain) const;
  const SmoothingParams& smoothing() const { return smoothing_; }
  void set_smoothing(const SmoothingParams& smoothing) { smoothing_ = smoothing; }

 private:
  ConditionalKde size_source_;
  ConditionalKde size_target_;
  ConditionalKde loc_source_;
  ConditionalKde loc_target_;
  SmoothingParams smoothing_;
};

/// Both datasets must share one class vocabulary (see
/// annotations::harmonize_classes).
BoxRatioModel fit_box_ratio_model(const DetectionDataset& source, const DetectionDataset& target,
                                  const SmoothingParams& smoothing = {},
                                  double min_bandwidth = kMinBandwidth);

inline double box_ratio(const BoxRatioModel& model, const BoxAnnotation& box) {
  return model.weight(box);
}

struct Moments2 {
  std::array<double, 2> mean{};
  std::array<double, 4> covariance{};  // row-major 2x2, n-1 denominator
};

struct ClassGeometry {
  std::int64_t count = 0;
  std::optional<Moments2> size;      // (w, h)
  std::optional<Moments2> location;  // (cx, cy)
};

struct DomainSummary {
  std::vector<std::int64_t> histogram;
  std::vector<double> frequencies;
  ClassWeights weights;
  std::vector<ClassGeometry> geometry;
};

struct Summary3 {
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
};

struct BoxRatioSummary {
  bool flagged = false;
  std::int64_t evaluated = 0;  // target annotations of the class
  std::int64_t below_threshold = 0;
  std::optional<Summary3> smoothed;
  std::optional<Summary3> raw;
};

struct GapReport {
  static constexpr int kSchemaVersion = 1;

  std::vector<std::string> classes;
  DomainSummary source;
  DomainSummary target;
  // P_T(c) / P_S(c); empty when the source has no annotations of c.
  std::vector<std::optional<double>> class_frequency_ratio;
  std::vector<BoxRatioSummary> box_ratio;
  SmoothingParams smoothing;
};

GapReport gap_report(const DetectionDataset& source, const DetectionDataset& target,
                     const SmoothingParams& smoothing = {});

void to_json(nlohmann::json& out, const GapReport& report);
void to_json(nlohmann::json& out, const ClassWeights& weights);
void to_json(nlohmann::json& out, const SmoothingParams& params);

struct AnnotationWeight {
  std::string image_id;
  std::size_t annotation_index = 0;
  std::string class_name;
  double w_class = 1.0;
  double v_box = 1.0;
  double combined = 1.0;
};

/// Per-annotation weights for one dataset: its class weights times the box
/// ratio evaluated at each box.
std::vector<AnnotationWeight> annotation_weights(const DetectionDataset& dataset,
                                                 const ClassWeights& class_weights,
                                                 const BoxRatioModel& model);

/// CSV columns: image_id,annotation_index,class,w_class,v_box,combined.
void write_weights_csv(std::span<const AnnotationWeight> rows, std::ostream& out);

/// Shortest round-trip decimal form of a double.
std::string format_double(double value);

}  // namespace care::content
