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

#include <map>
#include <vector>

#include <Eigen/Core>

namespace care::alignment {

using Matrix = Eigen::MatrixXd;  // one instance feature per row
using Vector = Eigen::VectorXd;

/// Same-class features from both domains.
struct ClassFeatures {
  Matrix source;  // k_S x d
  Matrix target;  // k_T x d
};

struct FeatureBatch {
  Eigen::Index dim = 0;
  std::map<int, ClassFeatures> classes;

  /// Throws std::invalid_argument on width mismatch or non-finite entries.
  void validate() const;
};

struct ClassGradients {
  Matrix source;
  Matrix target;
};

/// Gradients shaped like the FeatureBatch they came from; skipped classes
/// carry zero matrices.
struct AlignmentGradients {
  std::map<int, ClassGradients> classes;
};

/// Loss and exact gradients for one class.
struct PairLoss {
  double loss = 0.0;
  Matrix grad_source;
  Matrix grad_target;
};

struct AlignmentOptions {
  // Adds the target -> source -> target cycle and averages both directions.
  bool symmetric = false;
  // Rows used per class and domain; 0 means all.
  Eigen::Index max_per_class = 0;
};

struct AlignmentResult {
  double loss = 0.0;
  AlignmentGradients gradients;
  std::vector<int> aligned_classes;
  std::vector<int> skipped_classes;
};

/// S[i][j] = -||source_i - target_j||^2.
Matrix pairwise_neg_sqdist(const Matrix& source, const Matrix& target);

/// Max-subtracted softmax.
Vector softmax(const Vector& scores);

/// sum_m softmax(scores)_m * target_m.
Vector soft_matching(const Matrix& target, const Vector& scores);

/// A class takes part in the cycle loss when k_S >= 2 and k_T >= 1.
bool cycle_eligible(Eigen::Index source_rows, Eigen::Index target_rows);

// Source -> target -> source cycle-consistency loss for one class. Each
// source row is an anchor: it is soft-matched into the target rows, the match
// is scored against every source row, and the loss is the cross-entropy of
// that score vector with the anchor as label, averaged over anchors.
// Throws std::invalid_argument when the class is not eligible.
PairLoss cycle_consistency_loss(const Matrix& source, const Matrix& target);

/// Mean of per-class losses over eligible classes.
AlignmentResult cycle_consistency_loss(const FeatureBatch& batch, const AlignmentOptions& options = {});

/// Max over coordinates of |analytic - numeric| / max(1, |numeric|), using
/// central differences.
double check_gradients(const Matrix& source, const Matrix& target, double step = 1e-5);

/// ||mean(source) - mean(target)||^2 with gradients.
PairLoss linear_mmd(const Matrix& source, const Matrix& target);

/// Mean of per-class linear MMD over classes present on both sides.
AlignmentResult linear_mmd(const FeatureBatch& batch, const AlignmentOptions& options = {});

}  // namespace care::alignment
