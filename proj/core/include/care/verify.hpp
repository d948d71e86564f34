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
#include <stdexcept>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "care/content_stats.hpp"

namespace care::verify {

/// Shape of a finite (x, b, c) support.
struct Support {
  std::size_t features = 1;  // |X|
  std::size_t boxes = 1;     // |B|
  std::size_t classes = 1;   // |C|

  std::size_t cells() const { return features * boxes * classes; }
  std::size_t index(std::size_t x, std::size_t b, std::size_t c) const {
    return (x * boxes + b) * classes + c;
  }
  bool operator==(const Support&) const = default;
};

class SupportError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Joint probability table P(x, b, c) over a finite support.
class DiscreteJointDistribution {
 public:
  /// Throws std::invalid_argument unless entries are non-negative and sum to
  /// 1 within 1e-12.
  DiscreteJointDistribution(Support support, std::vector<double> probabilities);

  /// Rescales non-negative masses to sum to 1.
  static DiscreteJointDistribution normalized(Support support, std::vector<double> masses);

  const Support& support() const { return support_; }
  double operator()(std::size_t x, std::size_t b, std::size_t c) const {
    return p_[support_.index(x, b, c)];
  }
  const std::vector<double>& probabilities() const { return p_; }

  double class_marginal(std::size_t c) const;               // P(c)
  double box_class_marginal(std::size_t b, std::size_t c) const;  // P(b, c)
  double box_given_class(std::size_t b, std::size_t c) const;     // P(b | c)
  double feature_given_box_class(std::size_t x, std::size_t b, std::size_t c) const;  // P(x | b, c)

 private:
  Support support_;
  std::vector<double> p_;
  std::vector<double> class_marginal_;
  std::vector<double> box_class_marginal_;
};

/// Bounded loss value per support cell.
struct LossTable {
  Support support;
  std::vector<double> values;

  double operator()(std::size_t x, std::size_t b, std::size_t c) const {
    return values[support.index(x, b, c)];
  }
};

struct ExactWeights {
  Support support;
  std::vector<double> class_weight;  // w_S(c) = 1 / P_S(c)
  std::vector<double> box_ratio;     // v(b|c) = P_T(b|c) / P_S(b|c), indexed b * C + c

  double v(std::size_t b, std::size_t c) const { return box_ratio[b * support.classes + c]; }
};

/// Throws SupportError when the source has no mass where the target does.
ExactWeights exact_weights(const DiscreteJointDistribution& source,
                           const DiscreteJointDistribution& target);

/// E_S[w_S(C) v(B|C) l(x, B, C)].
double lhs_reweighted_source_risk(const DiscreteJointDistribution& source,
                                  const ExactWeights& weights, const LossTable& loss);

/// E_T[(P_S(x|B,C) / P_T(x|B,C)) (1 / P_T(C)) l(x, B, C)].
double rhs_target_reference_risk(const DiscreteJointDistribution& source,
                                 const DiscreteJointDistribution& target, const LossTable& loss);

/// E_T[(1 / P_T(C)) l(x, B, C)].
double class_weighted_target_risk(const DiscreteJointDistribution& target, const LossTable& loss);

/// Replaces every exact v(b|c) with the production smoothing and
/// thresholding (threshold applied to P_T(b|c)).
ExactWeights smoothed_weights(const ExactWeights& exact, const DiscreteJointDistribution& target,
                              const content::SmoothingParams& params);

struct IdentityReport {
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::size_t max_support = 4;
  double max_discrepancy = 0.0;                  // |LHS - RHS|
  double max_equal_appearance_discrepancy = 0.0;  // |LHS - E_T[l / P_T(C)]|
  // Informational: |LHS with smoothed v - RHS|.
  double smoothed_gap_mean = 0.0;
  double smoothed_gap_max = 0.0;
  double smoothed_gap_min = 0.0;
  double threshold = 1e-8;

  bool passed() const {
    return max_discrepancy < threshold && max_equal_appearance_discrepancy < threshold;
  }
};

/// Random distribution pairs with shared support and random bounded losses;
/// every support dimension is drawn from [1, max_support].
IdentityReport identity_report(std::size_t trials, std::uint64_t seed, std::size_t max_support = 4);

void to_json(nlohmann::json& out, const IdentityReport& report);

}  // namespace care::verify
