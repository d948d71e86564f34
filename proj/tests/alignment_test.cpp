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

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/QR>

#include "care/random.hpp"

namespace care::alignment {
namespace {

using Rows = std::vector<std::vector<double>>;

// Scalar reimplementation of the cycle loss on nested vectors: no Eigen, no
// shared helpers, every softmax spelled out.
double scalar_cycle_loss(const Rows& fs, const Rows& ft) {
  const std::size_t ks = fs.size(), kt = ft.size(), d = fs[0].size();
  double total = 0.0;
  for (std::size_t a = 0; a < ks; ++a) {
    std::vector<double> s(kt);
    for (std::size_t j = 0; j < kt; ++j) {
      double dist = 0.0;
      for (std::size_t m = 0; m < d; ++m) dist += (fs[a][m] - ft[j][m]) * (fs[a][m] - ft[j][m]);
      s[j] = -dist;
    }
    double smax = s[0];
    for (double v : s) smax = std::max(smax, v);
    double z = 0.0;
    for (double v : s) z += std::exp(v - smax);
    std::vector<double> match(d, 0.0);
    for (std::size_t j = 0; j < kt; ++j) {
      const double alpha = std::exp(s[j] - smax) / z;
      for (std::size_t m = 0; m < d; ++m) match[m] += alpha * ft[j][m];
    }
    std::vector<double> back(ks);
    for (std::size_t i = 0; i < ks; ++i) {
      double dist = 0.0;
      for (std::size_t m = 0; m < d; ++m) dist += (fs[i][m] - match[m]) * (fs[i][m] - match[m]);
      back[i] = -dist;
    }
    double bmax = back[0];
    for (double v : back) bmax = std::max(bmax, v);
    double bz = 0.0;
    for (double v : back) bz += std::exp(v - bmax);
    total += -(back[a] - bmax - std::log(bz));
  }
  return total / static_cast<double>(ks);
}

Rows to_rows(const Matrix& m) {
  Rows r(static_cast<std::size_t>(m.rows()), std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) r[i][j] = m(i, j);
  return r;
}

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

TEST(PairwiseNegSqdist, HandValues) {
  Matrix s(1, 2), t(1, 2);
  s << 0, 0;
  t << 3, 4;
  EXPECT_DOUBLE_EQ(pairwise_neg_sqdist(s, t)(0, 0), -25.0);
  const Matrix eye = Matrix::Identity(3, 3);
  const Matrix d = pairwise_neg_sqdist(eye, eye);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(d(i, i), 0.0);
  EXPECT_THROW(pairwise_neg_sqdist(Matrix::Zero(2, 3), Matrix::Zero(2, 4)), std::invalid_argument);
}

TEST(PairwiseNegSqdist, MatchesDoubleLoop) {
  Rng rng(1);
  const Matrix s = random_matrix(rng, 8, 5), t = random_matrix(rng, 6, 5);
  const Matrix d = pairwise_neg_sqdist(s, t);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 6; ++j) {
      double expected = 0.0;
      for (int m = 0; m < 5; ++m) expected -= (s(i, m) - t(j, m)) * (s(i, m) - t(j, m));
      EXPECT_NEAR(d(i, j), expected, 1e-12 * std::max(1.0, std::abs(expected)));
      EXPECT_LE(d(i, j), 0.0);
    }
  }
}

TEST(SoftMatching, SingletonAndUniform) {
  Rng rng(2);
  const Matrix t1 = random_matrix(rng, 1, 4);
  Vector one(1);
  one << -3.7;
  EXPECT_EQ(soft_matching(t1, one), Vector(t1.row(0).transpose()));

  const Matrix t = random_matrix(rng, 5, 3);
  const Vector uniform = Vector::Constant(5, -2.0);
  const Vector mean = t.colwise().mean().transpose();
  EXPECT_LT((soft_matching(t, uniform) - mean).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SoftMatching, DominantScore) {
  Matrix t(2, 2);
  t << 1.5, -2.0, 7.0, 3.0;
  Vector s(2);
  s << 0.0, -100.0;
  const Vector m = soft_matching(t, s);
  // The second weight is e^-100 / (1 + e^-100) ~ 3.7e-44.
  EXPECT_LE(std::abs(m(0) - 1.5), 1e-20 * 1.5);
  EXPECT_LE(std::abs(m(1) + 2.0), 1e-20 * 2.0);
  const Vector p = softmax(s);
  EXPECT_NEAR(p.sum(), 1.0, 1e-12);
  EXPECT_TRUE((p.array() > 0.0).all());
}

TEST(CycleLoss, SeparatedIdenticalBatchesNearZero) {
  Matrix f(2, 2);
  f << 0, 0, 10, 0;
  const PairLoss r = cycle_consistency_loss(f, f);
  EXPECT_LE(r.loss, 1e-10);
  EXPECT_GE(r.loss, 0.0);
}

TEST(CycleLoss, MatchesScalarOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    const auto ks = static_cast<Eigen::Index>(2 + rng.index(3));
    const auto kt = static_cast<Eigen::Index>(1 + rng.index(4));
    const auto d = static_cast<Eigen::Index>(1 + rng.index(4));
    const Matrix s = random_matrix(rng, ks, d, 0.8), t = random_matrix(rng, kt, d, 0.8);
    const double expected = scalar_cycle_loss(to_rows(s), to_rows(t));
    EXPECT_NEAR(cycle_consistency_loss(s, t).loss, expected, 1e-12 * std::max(1.0, expected));
  }
}

TEST(CycleLoss, IneligibleThrowsAndBatchSkips) {
  EXPECT_THROW(cycle_consistency_loss(Matrix::Zero(1, 3), Matrix::Zero(2, 3)), std::invalid_argument);
  EXPECT_THROW(cycle_consistency_loss(Matrix::Zero(3, 3), Matrix::Zero(0, 3)), std::invalid_argument);
  EXPECT_TRUE(cycle_eligible(2, 1));
  EXPECT_FALSE(cycle_eligible(1, 5));

  Rng rng(4);
  FeatureBatch batch;
  batch.dim = 3;
  batch.classes[0] = {random_matrix(rng, 3, 3), random_matrix(rng, 2, 3)};
  batch.classes[1] = {random_matrix(rng, 1, 3), random_matrix(rng, 4, 3)};
  batch.classes[5] = {random_matrix(rng, 4, 3), Matrix(0, 3)};
  const AlignmentResult r = cycle_consistency_loss(batch);
  EXPECT_EQ(r.aligned_classes, std::vector<int>{0});
  EXPECT_EQ(r.skipped_classes, (std::vector<int>{1, 5}));
  EXPECT_NEAR(r.loss, cycle_consistency_loss(batch.classes[0].source, batch.classes[0].target).loss, 1e-15);
  EXPECT_TRUE(r.gradients.classes.at(1).source.isZero(0.0));
  EXPECT_TRUE(r.gradients.classes.at(1).target.isZero(0.0));
  EXPECT_EQ(r.gradients.classes.at(5).source.rows(), 4);
}

TEST(CycleLoss, BatchIsMeanOverClasses) {
  Rng rng(5);
  FeatureBatch batch;
  batch.dim = 2;
  batch.classes[0] = {random_matrix(rng, 3, 2), random_matrix(rng, 2, 2)};
  batch.classes[1] = {random_matrix(rng, 5, 2), random_matrix(rng, 3, 2)};
  const double l0 = cycle_consistency_loss(batch.classes[0].source, batch.classes[0].target).loss;
  const double l1 = cycle_consistency_loss(batch.classes[1].source, batch.classes[1].target).loss;
  EXPECT_NEAR(cycle_consistency_loss(batch).loss, 0.5 * (l0 + l1), 1e-15);
}

TEST(CycleLoss, SymmetricAveragesBothDirections) {
  Rng rng(6);
  FeatureBatch batch;
  batch.dim = 2;
  const Matrix s = random_matrix(rng, 3, 2), t = random_matrix(rng, 4, 2);
  batch.classes[0] = {s, t};
  AlignmentOptions sym;
  sym.symmetric = true;
  const double expected = 0.5 * (cycle_consistency_loss(s, t).loss + cycle_consistency_loss(t, s).loss);
  EXPECT_NEAR(cycle_consistency_loss(batch, sym).loss, expected, 1e-14);
}

TEST(CycleLoss, GradientCheckRandom) {
  Rng rng(7);
  const Matrix s = random_matrix(rng, 4, 3), t = random_matrix(rng, 5, 3);
  EXPECT_LT(check_gradients(s, t), 1e-6);
}

TEST(CycleLoss, GradientCheckDegenerate) {
  const Matrix s = Matrix::Constant(3, 2, 0.7), t = Matrix::Constant(2, 2, 0.7);
  const PairLoss r = cycle_consistency_loss(s, t);
  EXPECT_NEAR(r.loss, std::log(3.0), 1e-14);
  EXPECT_TRUE(r.grad_source.allFinite());
  EXPECT_TRUE(r.grad_target.allFinite());
  EXPECT_LT(check_gradients(s, t), 1e-6);
}

TEST(CycleLoss, Invariances) {
  Rng rng(8);
  const Matrix s = random_matrix(rng, 4, 3), t = random_matrix(rng, 3, 3);
  const double base = cycle_consistency_loss(s, t).loss;

  const Eigen::RowVectorXd shift = random_matrix(rng, 1, 3, 5.0);
  EXPECT_NEAR(cycle_consistency_loss(s.rowwise() + shift, t.rowwise() + shift).loss, base, 1e-10);

  const Eigen::HouseholderQR<Matrix> qr(random_matrix(rng, 3, 3));
  const Matrix q = qr.householderQ();
  EXPECT_NEAR(cycle_consistency_loss(s * q, t * q).loss, base, 1e-9);

  Eigen::PermutationMatrix<Eigen::Dynamic> ps(4), pt(3);
  ps.indices() << 2, 0, 3, 1;
  pt.indices() << 1, 2, 0;
  EXPECT_NEAR(cycle_consistency_loss(ps * s, pt * t).loss, base, 1e-12);
}

TEST(LinearMmd, Values) {
  Matrix s(2, 2), t(2, 2);
  s << -1, 1, 1, -1;
  t << 1, 1, 1, 1;
  const PairLoss r = linear_mmd(s, t);
  EXPECT_DOUBLE_EQ(r.loss, 2.0);
  EXPECT_EQ(linear_mmd(s, s).loss, 0.0);
  Matrix sp(2, 2);
  sp << 1, -1, -1, 1;
  EXPECT_DOUBLE_EQ(linear_mmd(sp, t).loss, 2.0);
  EXPECT_THROW(linear_mmd(Matrix(0, 2), t), std::invalid_argument);
}

TEST(LinearMmd, GradientsMatchFiniteDifferences) {
  Rng rng(9);
  Matrix s = random_matrix(rng, 3, 2), t = random_matrix(rng, 4, 2);
  const PairLoss r = linear_mmd(s, t);
  const double h = 1e-6;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      Matrix p = s, m = s;
      p(i, j) += h;
      m(i, j) -= h;
      EXPECT_NEAR(r.grad_source(i, j), (linear_mmd(p, t).loss - linear_mmd(m, t).loss) / (2 * h), 1e-8);
    }
  }
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    for (Eigen::Index j = 0; j < t.cols(); ++j) {
      Matrix p = t, m = t;
      p(i, j) += h;
      m(i, j) -= h;
      EXPECT_NEAR(r.grad_target(i, j), (linear_mmd(s, p).loss - linear_mmd(s, m).loss) / (2 * h), 1e-8);
    }
  }
}

TEST(FeatureBatch, ValidateRejectsBadInput) {
  FeatureBatch batch;
  batch.dim = 2;
  batch.classes[0] = {Matrix::Zero(2, 2), Matrix::Zero(1, 3)};
  EXPECT_THROW(batch.validate(), std::invalid_argument);
  batch.classes[0] = {Matrix::Zero(2, 2), Matrix::Constant(1, 2, std::nan(""))};
  EXPECT_THROW(batch.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace care::alignment
