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
#include "care/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "care/random.hpp"

namespace care::verify {
namespace {

// Cells are floored at this mass before renormalizing so both domains share
// full support.
constexpr double kCellFloor = 1e-3;

std::vector<double> random_masses(Rng& rng, std::size_t n) {
  std::vector<double> m(n);
  double total = 0.0;
  for (double& v : m) {
    v = -std::log(rng.uniform_positive());  // Exp(1)
    total += v;
  }
  for (double& v : m) v = std::max(v / total, kCellFloor);
  return m;
}

LossTable random_loss(Rng& rng, const Support& s) {
  LossTable loss{s, std::vector<double>(s.cells())};
  for (double& v : loss.values) v = rng.uniform(0.0, 10.0);
  return loss;
}

}  // namespace

DiscreteJointDistribution::DiscreteJointDistribution(Support support, std::vector<double> probabilities)
    : support_(support), p_(std::move(probabilities)) {
  if (p_.size() != support_.cells() || support_.cells() == 0) {
    throw std::invalid_argument("probability table does not match its support");
  }
  double total = 0.0;
  for (double v : p_) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("probabilities must be finite and >= 0");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("probabilities must sum to 1");

  class_marginal_.assign(support_.classes, 0.0);
  box_class_marginal_.assign(support_.boxes * support_.classes, 0.0);
  for (std::size_t x = 0; x < support_.features; ++x) {
    for (std::size_t b = 0; b < support_.boxes; ++b) {
      for (std::size_t c = 0; c < support_.classes; ++c) {
        const double v = (*this)(x, b, c);
        class_marginal_[c] += v;
        box_class_marginal_[b * support_.classes + c] += v;
      }
    }
  }
}

DiscreteJointDistribution DiscreteJointDistribution::normalized(Support support, std::vector<double> masses) {
  double total = 0.0;
  for (double v : masses) total += v;
  if (!(total > 0.0)) throw std::invalid_argument("masses must have positive total");
  for (double& v : masses) v /= total;
  return {support, std::move(masses)};
}

double DiscreteJointDistribution::class_marginal(std::size_t c) const { return class_marginal_[c]; }

double DiscreteJointDistribution::box_class_marginal(std::size_t b, std::size_t c) const {
  return box_class_marginal_[b * support_.classes + c];
}

double DiscreteJointDistribution::box_given_class(std::size_t b, std::size_t c) const {
  return box_class_marginal(b, c) / class_marginal(c);
}

double DiscreteJointDistribution::feature_given_box_class(std::size_t x, std::size_t b, std::size_t c) const {
  return (*this)(x, b, c) / box_class_marginal(b, c);
}

ExactWeights exact_weights(const DiscreteJointDistribution& source, const DiscreteJointDistribution& target) {
  if (!(source.support() == target.support())) throw SupportError("distributions have different supports");
  const Support& s = source.support();
  ExactWeights w;
  w.support = s;
  w.class_weight.assign(s.classes, 0.0);
  w.box_ratio.assign(s.boxes * s.classes, 0.0);
  for (std::size_t c = 0; c < s.classes; ++c) {
    const double ps = source.class_marginal(c);
    const double pt = target.class_marginal(c);
    if (ps > 0.0) {
      w.class_weight[c] = 1.0 / ps;
    } else if (pt > 0.0) {
      throw SupportError("zero source class marginal on target support (class " + std::to_string(c) + ")");
    }
    for (std::size_t b = 0; b < s.boxes; ++b) {
      const double bs = source.box_class_marginal(b, c);
      const double bt = target.box_class_marginal(b, c);
      if (bs > 0.0) {
        w.box_ratio[b * s.classes + c] = (pt > 0.0 ? target.box_given_class(b, c) : 0.0) /
                                         source.box_given_class(b, c);
      } else if (bt > 0.0) {
        throw SupportError("zero source box marginal on target support (box " + std::to_string(b) +
                           ", class " + std::to_string(c) + ")");
      }
    }
  }
  return w;
}

double lhs_reweighted_source_risk(const DiscreteJointDistribution& source, const ExactWeights& weights,
                                  const LossTable& loss) {
  const Support& s = source.support();
  double sum = 0.0;
  for (std::size_t x = 0; x < s.features; ++x) {
    for (std::size_t b = 0; b < s.boxes; ++b) {
      for (std::size_t c = 0; c < s.classes; ++c) {
        const double p = source(x, b, c);
        if (p == 0.0) continue;
        sum += p * weights.class_weight[c] * weights.v(b, c) * loss(x, b, c);
      }
    }
  }
  return sum;
}

double rhs_target_reference_risk(const DiscreteJointDistribution& source,
                                 const DiscreteJointDistribution& target, const LossTable& loss) {
  if (!(source.support() == target.support())) throw SupportError("distributions have different supports");
  const Support& s = target.support();
  double sum = 0.0;
  for (std::size_t x = 0; x < s.features; ++x) {
    for (std::size_t b = 0; b < s.boxes; ++b) {
      for (std::size_t c = 0; c < s.classes; ++c) {
        const double p = target(x, b, c);
        if (p == 0.0) continue;
        if (source.box_class_marginal(b, c) == 0.0) {
          throw SupportError("target cell outside source support");
        }
        const double appearance =
            source.feature_given_box_class(x, b, c) / target.feature_given_box_class(x, b, c);
        sum += p * appearance / target.class_marginal(c) * loss(x, b, c);
      }
    }
  }
  return sum;
}

double class_weighted_target_risk(const DiscreteJointDistribution& target, const LossTable& loss) {
  const Support& s = target.support();
  double sum = 0.0;
  for (std::size_t x = 0; x < s.features; ++x) {
    for (std::size_t b = 0; b < s.boxes; ++b) {
      for (std::size_t c = 0; c < s.classes; ++c) {
        const double p = target(x, b, c);
        if (p == 0.0) continue;
        sum += p / target.class_marginal(c) * loss(x, b, c);
      }
    }
  }
  return sum;
}

ExactWeights smoothed_weights(const ExactWeights& exact, const DiscreteJointDistribution& target,
                              const content::SmoothingParams& params) {
  ExactWeights out = exact;
  const Support& s = exact.support;
  for (std::size_t b = 0; b < s.boxes; ++b) {
    for (std::size_t c = 0; c < s.classes; ++c) {
      const double support = target.class_marginal(c) > 0.0 ? target.box_given_class(b, c) : 0.0;
      out.box_ratio[b * s.classes + c] =
          support > params.tau ? content::smooth_ratio(exact.v(b, c), params) : params.floor;
    }
  }
  return out;
}

IdentityReport identity_report(std::size_t trials, std::uint64_t seed, std::size_t max_support) {
  if (max_support < 1) throw std::invalid_argument("max_support must be >= 1");
  IdentityReport report;
  report.trials = trials;
  report.seed = seed;
  report.max_support = max_support;
  report.smoothed_gap_min = trials > 0 ? std::numeric_limits<double>::infinity() : 0.0;
  const content::SmoothingParams smoothing;
  double gap_total = 0.0;

  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(mix_seed(seed, t));
    Support s;
    s.features = 1 + static_cast<std::size_t>(rng.index(max_support));
    s.boxes = 1 + static_cast<std::size_t>(rng.index(max_support));
    s.classes = 1 + static_cast<std::size_t>(rng.index(max_support));

    const auto source = DiscreteJointDistribution::normalized(s, random_masses(rng, s.cells()));
    const auto target = DiscreteJointDistribution::normalized(s, random_masses(rng, s.cells()));
    const LossTable loss = random_loss(rng, s);

    const ExactWeights weights = exact_weights(source, target);
    const double lhs = lhs_reweighted_source_risk(source, weights, loss);
    const double rhs = rhs_target_reference_risk(source, target, loss);
    report.max_discrepancy = std::max(report.max_discrepancy, std::abs(lhs - rhs));

    // Target sharing the source appearance conditionals P(x | b, c).
    const auto box_class = DiscreteJointDistribution::normalized(
        Support{1, s.boxes, s.classes}, random_masses(rng, s.boxes * s.classes));
    std::vector<double> masses(s.cells());
    for (std::size_t x = 0; x < s.features; ++x) {
      for (std::size_t b = 0; b < s.boxes; ++b) {
        for (std::size_t c = 0; c < s.classes; ++c) {
          masses[s.index(x, b, c)] = source.feature_given_box_class(x, b, c) * box_class(0, b, c);
        }
      }
    }
    const auto aligned = DiscreteJointDistribution::normalized(s, std::move(masses));
    const double lhs_aligned = lhs_reweighted_source_risk(source, exact_weights(source, aligned), loss);
    report.max_equal_appearance_discrepancy =
        std::max(report.max_equal_appearance_discrepancy,
                 std::abs(lhs_aligned - class_weighted_target_risk(aligned, loss)));

    const double smoothed_lhs =
        lhs_reweighted_source_risk(source, smoothed_weights(weights, target, smoothing), loss);
    const double gap = std::abs(smoothed_lhs - rhs);
    gap_total += gap;
    report.smoothed_gap_max = std::max(report.smoothed_gap_max, gap);
    report.smoothed_gap_min = std::min(report.smoothed_gap_min, gap);
  }
  if (trials > 0) report.smoothed_gap_mean = gap_total / static_cast<double>(trials);
  return report;
}

void to_json(nlohmann::json& out, const IdentityReport& r) {
  out = {{"schema", "care.identity_report"},
         {"schema_version", 1},
         {"trials", r.trials},
         {"seed", r.seed},
         {"max_support", r.max_support},
         {"max_discrepancy", r.max_discrepancy},
         {"max_equal_appearance_discrepancy", r.max_equal_appearance_discrepancy},
         {"threshold", r.threshold},
         {"passed", r.passed()},
         {"smoothed_gap",
          {{"mean_abs", r.smoothed_gap_mean}, {"min_abs", r.smoothed_gap_min}, {"max_abs", r.smoothed_gap_max}}}};
}

}  // namespace care::verify
