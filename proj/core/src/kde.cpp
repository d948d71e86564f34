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
#include "care/kde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace care::content {
namespace {

double sample_stddev(std::span<const Point2> points, double Point2::*member) {
  const auto n = static_cast<double>(points.size());
  if (points.size() < 2) return 0.0;
  double mean = 0.0;
  for (const Point2& p : points) mean += p.*member;
  mean /= n;
  double ss = 0.0;
  for (const Point2& p : points) ss += (p.*member - mean) * (p.*member - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

GaussianKde2d::GaussianKde2d(std::vector<Point2> points, std::array<double, 2> bandwidth)
    : points_(std::move(points)), bandwidth_(bandwidth) {
  if (points_.empty()) throw std::invalid_argument("KDE needs at least one point");
  if (!(bandwidth_[0] > 0.0) || !(bandwidth_[1] > 0.0)) {
    throw std::invalid_argument("KDE bandwidth must be positive");
  }
  log_norm_ = -std::log(2.0 * std::numbers::pi * bandwidth_[0] * bandwidth_[1] *
                        static_cast<double>(points_.size()));
}

double GaussianKde2d::scott_factor(std::size_t n) {
  return std::pow(static_cast<double>(n), -1.0 / 6.0);
}

GaussianKde2d GaussianKde2d::fit(std::span<const Point2> points, double min_bandwidth) {
  if (points.empty()) throw std::invalid_argument("KDE needs at least one point");
  const double factor = scott_factor(points.size());
  const std::array<double, 2> bandwidth{
      std::max(factor * sample_stddev(points, &Point2::x), min_bandwidth),
      std::max(factor * sample_stddev(points, &Point2::y), min_bandwidth)};
  return {std::vector<Point2>(points.begin(), points.end()), bandwidth};
}

GaussianKde2d GaussianKde2d::with_bandwidth(std::span<const Point2> points,
                                            std::array<double, 2> bandwidth) {
  return {std::vector<Point2>(points.begin(), points.end()), bandwidth};
}

double GaussianKde2d::pdf(Point2 p) const {
  const double inv_h1 = 1.0 / bandwidth_[0];
  const double inv_h2 = 1.0 / bandwidth_[1];
  double sum = 0.0;
  for (const Point2& q : points_) {
    const double u = (p.x - q.x) * inv_h1;
    const double v = (p.y - q.y) * inv_h2;
    sum += std::exp(-0.5 * (u * u + v * v));
  }
  return sum / (2.0 * std::numbers::pi * bandwidth_[0] * bandwidth_[1] *
                static_cast<double>(points_.size()));
}

double GaussianKde2d::log_pdf(Point2 p) const {
  const double inv_h1 = 1.0 / bandwidth_[0];
  const double inv_h2 = 1.0 / bandwidth_[1];
  double best = -std::numeric_limits<double>::infinity();
  for (const Point2& q : points_) {
    const double u = (p.x - q.x) * inv_h1;
    const double v = (p.y - q.y) * inv_h2;
    best = std::max(best, -0.5 * (u * u + v * v));
  }
  double sum = 0.0;
  for (const Point2& q : points_) {
    const double u = (p.x - q.x) * inv_h1;
    const double v = (p.y - q.y) * inv_h2;
    sum += std::exp(-0.5 * (u * u + v * v) - best);
  }
  return best + std::log(sum) + log_norm_;
}

Point2 GaussianKde2d::mean() const {
  Point2 m;
  for (const Point2& p : points_) {
    m.x += p.x;
    m.y += p.y;
  }
  m.x /= static_cast<double>(points_.size());
  m.y /= static_cast<double>(points_.size());
  return m;
}

double GaussianKde2d::mean_product() const {
  double sum = 0.0;
  for (const Point2& p : points_) sum += p.x * p.y;
  return sum / static_cast<double>(points_.size());
}

ConditionalKde ConditionalKde::fit(const std::vector<std::vector<Point2>>& per_class,
                                   double min_bandwidth) {
  ConditionalKde out;
  out.components_.reserve(per_class.size());
  for (const auto& points : per_class) {
    if (points.empty()) {
      out.components_.emplace_back(std::nullopt);
    } else {
      out.components_.emplace_back(GaussianKde2d::fit(points, min_bandwidth));
    }
  }
  return out;
}

}  // namespace care::content
