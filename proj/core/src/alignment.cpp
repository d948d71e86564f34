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
#include "care/alignment.hpp"

#include <cmath>
#include <stdexcept>

namespace care::alignment {
namespace {

// Per-anchor cycle term, accumulating gradients scaled by `scale`.
double anchor_loss(const Matrix& source, const Matrix& target, Eigen::Index anchor, double scale,
                   Matrix& grad_source, Matrix& grad_target) {
  const Eigen::Index ks = source.rows();
  const Eigen::Index kt = target.rows();
  const Vector u = source.row(anchor).transpose();

  Vector s(kt);
  for (Eigen::Index j = 0; j < kt; ++j) s[j] = -(u - target.row(j).transpose()).squaredNorm();
  const Vector alpha = softmax(s);
  const Vector matched = target.transpose() * alpha;

  Vector back(ks);
  for (Eigen::Index i = 0; i < ks; ++i) back[i] = -(source.row(i).transpose() - matched).squaredNorm();
  const double peak = back.maxCoeff();
  const double lse = peak + std::log((back.array() - peak).exp().sum());
  const double loss = lse - back[anchor];

  // d loss / d back_i = p_i - [i == anchor]
  Vector g = (back.array() - lse).exp().matrix();
  g[anchor] -= 1.0;

  Vector grad_matched = Vector::Zero(source.cols());
  for (Eigen::Index i = 0; i < ks; ++i) {
    const Vector diff = source.row(i).transpose() - matched;
    grad_source.row(i) += (scale * -2.0 * g[i]) * diff.transpose();
    grad_matched += (2.0 * g[i]) * diff;
  }
  // matched = sum_j alpha_j t_j
  const Vector dots = target * grad_matched;
  const double mean_dot = alpha.dot(dots);
  for (Eigen::Index j = 0; j < kt; ++j) {
    grad_target.row(j) += (scale * alpha[j]) * grad_matched.transpose();
    const double grad_s = alpha[j] * (dots[j] - mean_dot);
    const Vector diff = u - target.row(j).transpose();
    grad_source.row(anchor) += (scale * -2.0 * grad_s) * diff.transpose();
    grad_target.row(j) += (scale * 2.0 * grad_s) * diff.transpose();
  }
  return loss;
}

Matrix capped(const Matrix& m, Eigen::Index cap) {
  if (cap <= 0 || m.rows() <= cap) return m;
  return m.topRows(cap);
}

void place(const Matrix& grad, Matrix& full) {
  full.topRows(grad.rows()) = grad;
}

template <typename PairFn, typename EligibleFn>
AlignmentResult per_class_mean(const FeatureBatch& batch, const AlignmentOptions& options,
                               PairFn pair_fn, EligibleFn eligible) {
  batch.validate();
  AlignmentResult result;
  std::vector<std::pair<int, PairLoss>> terms;
  for (const auto& [cls, features] : batch.classes) {
    ClassGradients zero{Matrix::Zero(features.source.rows(), batch.dim),
                        Matrix::Zero(features.target.rows(), batch.dim)};
    result.gradients.classes.emplace(cls, std::move(zero));
    const Matrix src = capped(features.source, options.max_per_class);
    const Matrix tgt = capped(features.target, options.max_per_class);
    if (!eligible(src.rows(), tgt.rows())) {
      result.skipped_classes.push_back(cls);
      continue;
    }
    result.aligned_classes.push_back(cls);
    terms.emplace_back(cls, pair_fn(src, tgt));
  }
  if (terms.empty()) return result;
  const double scale = 1.0 / static_cast<double>(terms.size());
  for (auto& [cls, term] : terms) {
    result.loss += scale * term.loss;
    ClassGradients& g = result.gradients.classes.at(cls);
    place(scale * term.grad_source, g.source);
    place(scale * term.grad_target, g.target);
  }
  return result;
}

}  // namespace

void FeatureBatch::validate() const {
  for (const auto& [cls, f] : classes) {
    if ((f.source.rows() > 0 && f.source.cols() != dim) ||
        (f.target.rows() > 0 && f.target.cols() != dim)) {
      throw std::invalid_argument("feature width mismatch for class " + std::to_string(cls));
    }
    if (!f.source.allFinite() || !f.target.allFinite()) {
      throw std::invalid_argument("non-finite feature for class " + std::to_string(cls));
    }
  }
}

Matrix pairwise_neg_sqdist(const Matrix& source, const Matrix& target) {
  if (source.cols() != target.cols()) {
    throw std::invalid_argument("pairwise_neg_sqdist: feature dimensions differ");
  }
  Matrix out(source.rows(), target.rows());
  for (Eigen::Index i = 0; i < source.rows(); ++i) {
    for (Eigen::Index j = 0; j < target.rows(); ++j) {
      out(i, j) = -(source.row(i) - target.row(j)).squaredNorm();
    }
  }
  return out;
}

Vector softmax(const Vector& scores) {
  const double peak = scores.maxCoeff();
  Vector e = (scores.array() - peak).exp().matrix();
  return e / e.sum();
}

Vector soft_matching(const Matrix& target, const Vector& scores) {
  if (target.rows() == 0) throw std::invalid_argument("soft_matching: empty target set");
  if (scores.size() != target.rows()) {
    throw std::invalid_argument("soft_matching: score count does not match target rows");
  }
  return target.transpose() * softmax(scores);
}

bool cycle_eligible(Eigen::Index source_rows, Eigen::Index target_rows) {
  return source_rows >= 2 && target_rows >= 1;
}

PairLoss cycle_consistency_loss(const Matrix& source, const Matrix& target) {
  if (source.cols() != target.cols()) {
    throw std::invalid_argument("cycle_consistency_loss: feature dimensions differ");
  }
  if (!cycle_eligible(source.rows(), target.rows())) {
    throw std::invalid_argument("cycle_consistency_loss: needs k_S >= 2 and k_T >= 1");
  }
  PairLoss out;
  out.grad_source = Matrix::Zero(source.rows(), source.cols());
  out.grad_target = Matrix::Zero(target.rows(), target.cols());
  const double scale = 1.0 / static_cast<double>(source.rows());
  for (Eigen::Index a = 0; a < source.rows(); ++a) {
    out.loss += scale * anchor_loss(source, target, a, scale, out.grad_source, out.grad_target);
  }
  return out;
}

AlignmentResult cycle_consistency_loss(const FeatureBatch& batch, const AlignmentOptions& options) {
  if (!options.symmetric) {
    return per_class_mean(
        batch, options,
        [](const Matrix& s, const Matrix& t) { return cycle_consistency_loss(s, t); },
        cycle_eligible);
  }
  return per_class_mean(
      batch, options,
      [](const Matrix& s, const Matrix& t) {
        PairLoss forward = cycle_consistency_loss(s, t);
        if (!cycle_eligible(t.rows(), s.rows())) return forward;
        const PairLoss backward = cycle_consistency_loss(t, s);
        forward.loss = 0.5 * (forward.loss + backward.loss);
        forward.grad_source = 0.5 * (forward.grad_source + backward.grad_target);
        forward.grad_target = 0.5 * (forward.grad_target + backward.grad_source);
        return forward;
      },
      cycle_eligible);
}

double check_gradients(const Matrix& source, const Matrix& target, double step) {
  const PairLoss analytic = cycle_consistency_loss(source, target);
  double worst = 0.0;
  auto probe = [&](Matrix& m, const Matrix& grad, bool is_source) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double saved = m(i, j);
        m(i, j) = saved + step;
        const double up = is_source ? cycle_consistency_loss(m, target).loss
                                    : cycle_consistency_loss(source, m).loss;
        m(i, j) = saved - step;
        const double down = is_source ? cycle_consistency_loss(m, target).loss
                                      : cycle_consistency_loss(source, m).loss;
        m(i, j) = saved;
        const double numeric = (up - down) / (2.0 * step);
        worst = std::max(worst, std::abs(grad(i, j) - numeric) / std::max(1.0, std::abs(numeric)));
      }
    }
  };
  Matrix s = source;
  probe(s, analytic.grad_source, true);
  Matrix t = target;
  probe(t, analytic.grad_target, false);
  return worst;
}

PairLoss linear_mmd(const Matrix& source, const Matrix& target) {
  if (source.rows() == 0 || target.rows() == 0) {
    throw std::invalid_argument("linear_mmd: both domains need at least one row");
  }
  if (source.cols() != target.cols()) {
    throw std::invalid_argument("linear_mmd: feature dimensions differ");
  }
  const Eigen::RowVectorXd diff = source.colwise().mean() - target.colwise().mean();
  PairLoss out;
  out.loss = diff.squaredNorm();
  out.grad_source = (2.0 / static_cast<double>(source.rows()) * diff).replicate(source.rows(), 1);
  out.grad_target = (-2.0 / static_cast<double>(target.rows()) * diff).replicate(target.rows(), 1);
  return out;
}

AlignmentResult linear_mmd(const FeatureBatch& batch, const AlignmentOptions& options) {
  return per_class_mean(
      batch, options, [](const Matrix& s, const Matrix& t) { return linear_mmd(s, t); },
      [](Eigen::Index ks, Eigen::Index kt) { return ks >= 1 && kt >= 1; });
}

}  // namespace care::alignment
