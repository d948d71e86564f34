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
#include <optional>
#include <span>
#include <vector>

namespace care::content {

/// Lower bound on every KDE bandwidth entry, in normalized box units.
inline constexpr double kMinBandwidth = 1e-3;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

// Gaussian kernel density estimate in two dimensions with a diagonal
// bandwidth. The density is the equal-weight mixture
//   pdf(p) = (1/n) sum_i N(p; x_i, diag(h1^2, h2^2)).
class GaussianKde2d {
 public:
  /// Fits with Scott's rule, h_j = n^(-1/6) * stddev_j, floored at
  /// min_bandwidth. Throws std::invalid_argument on an empty sample.
  static GaussianKde2d fit(std::span<const Point2> points, double min_bandwidth = kMinBandwidth);

  /// Uses the given bandwidth verbatim (no floor).
  static GaussianKde2d with_bandwidth(std::span<const Point2> points, std::array<double, 2> bandwidth);

  /// Scott's factor for d = 2.
  static double scott_factor(std::size_t n);

  double pdf(Point2 p) const;
  /// log pdf via log-sum-exp; finite wherever the arguments are.
  double log_pdf(Point2 p) const;

  std::array<double, 2> bandwidth() const { return bandwidth_; }
  std::size_t size() const { return points_.size(); }
  const std::vector<Point2>& points() const { return points_; }

  /// Mean of the mixture, equal to the sample mean.
  Point2 mean() const;
  /// E[x * y] under the mixture; each kernel is axis-aligned, so this is the
  /// sample mean of x_i * y_i (box area when fitted on (w, h)).
  double mean_product() const;

 private:
  GaussianKde2d(std::vector<Point2> points, std::array<double, 2> bandwidth);

  std::vector<Point2> points_;
  std::array<double, 2> bandwidth_{};
  double log_norm_ = 0.0;  // -log(2 pi h1 h2 n)
};

/// Per-class KDE; classes without samples have no component.
class ConditionalKde {
 public:
  ConditionalKde() = default;
  static ConditionalKde fit(const std::vector<std::vector<Point2>>& per_class,
                            double min_bandwidth = kMinBandwidth);

  std::size_t num_classes() const { return components_.size(); }
  bool has_class(std::size_t c) const { return c < components_.size() && components_[c].has_value(); }
  const GaussianKde2d& component(std::size_t c) const { return components_.at(c).value(); }
  std::size_t count(std::size_t c) const { return has_class(c) ? components_[c]->size() : 0; }

 private:
  std::vector<std::optional<GaussianKde2d>> components_;
};

}  // namespace care::content
