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
// Randomized invariant checks. Each property runs over many seeded cases so
// failures are reproducible from the printed case index.

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "care/alignment.hpp"
#include "care/annotations.hpp"
#include "care/content_stats.hpp"
#include "care/kde.hpp"
#include "care/random.hpp"
#include "care/verify.hpp"

namespace care {
namespace {

constexpr int kCases = 100;

annotations::DetectionDataset random_dataset(Rng& rng, int classes, int images, Domain domain) {
  annotations::DetectionDataset ds;
  ds.domain = domain;
  for (int c = 0; c < classes; ++c) {
    ds.classes.push_back("k" + std::to_string(c));
    ds.original_class_ids.push_back(c);
  }
  for (int i = 0; i < images; ++i) {
    const annotations::ImageInfo image{"img" + std::to_string(i), std::floor(rng.uniform(50, 3000)),
                                       std::floor(rng.uniform(50, 2000))};
    ds.images.push_back(image);
    const auto boxes = rng.index(4);
    for (std::uint64_t b = 0; b < boxes; ++b) {
      annotations::PixelBox p;
      p.w = rng.uniform(1.0, image.width / 2);
      p.h = rng.uniform(1.0, image.height / 2);
      p.x = rng.uniform(0.0, image.width - p.w);
      p.y = rng.uniform(0.0, image.height - p.h);
      ds.annotations.push_back(
          annotations::normalize_box(p, image, static_cast<int>(rng.index(classes)), false));
      ds.annotations.back().image_id = image.image_id;
    }
  }
  return ds;
}

TEST(Property, WeightMassConserved) {
  Rng rng(1);
  for (int t = 0; t < kCases; ++t) {
    std::vector<std::int64_t> counts(1 + rng.index(12));
    std::int64_t total = 0;
    for (auto& c : counts) total += (c = 1 + static_cast<std::int64_t>(rng.index(100000)));
    const auto w = content::inverse_frequency_weights(counts);
    double mass = 0.0;
    for (std::size_t c = 0; c < counts.size(); ++c) mass += w[c] * static_cast<double>(counts[c]);
    EXPECT_LE(std::abs(mass - static_cast<double>(total)), 1e-9 * static_cast<double>(total)) << "case " << t;
  }
}

TEST(Property, BoxRatioBounded) {
  Rng rng(2);
  for (int t = 0; t < 30; ++t) {
    const auto s = random_dataset(rng, 3, 40, Domain::kSource);
    const auto tg = random_dataset(rng, 3, 40, Domain::kTarget);
    content::SmoothingParams p;
    p.tau = t % 3 == 0 ? 0.0 : p.tau;
    const auto model = content::fit_box_ratio_model(s, tg, p);
    for (int q = 0; q < 50; ++q) {
      const annotations::BoxAnnotation box{"q", static_cast<int>(rng.index(3)), rng.uniform(-1, 2),
                                           rng.uniform(-1, 2), rng.uniform(1e-4, 1), rng.uniform(1e-4, 1)};
      const double v = content::box_ratio(model, box);
      EXPECT_GE(v, 1.0) << "case " << t;
      EXPECT_LT(v, 11.0) << "case " << t;
    }
  }
}

TEST(Property, KdePositiveAndFinite) {
  Rng rng(3);
  for (int t = 0; t < kCases; ++t) {
    std::vector<content::Point2> pts(1 + rng.index(30));
    for (auto& p : pts) p = {rng.uniform(), rng.uniform()};
    const auto kde = content::GaussianKde2d::fit(pts);
    EXPECT_GE(kde.bandwidth()[0], content::kMinBandwidth);
    EXPECT_GE(kde.bandwidth()[1], content::kMinBandwidth);
    // Near the sample the density is representable and strictly positive;
    // anywhere, its logarithm is finite.
    const content::Point2 near{pts[0].x + 0.5 * kde.bandwidth()[0], pts[0].y};
    EXPECT_GT(kde.pdf(near), 0.0);
    EXPECT_TRUE(std::isfinite(kde.log_pdf({rng.uniform(-100, 100), rng.uniform(-100, 100)})));
  }
}

TEST(Property, ScottFactorDecreasing) {
  for (std::size_t n = 1; n < 2000; ++n) {
    EXPECT_LT(content::GaussianKde2d::scott_factor(n + 1), content::GaussianKde2d::scott_factor(n));
  }
}

alignment::Matrix random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  alignment::Matrix m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
  return m;
}

TEST(Property, CycleLossGradientsAndInvariance) {
  Rng rng(4);
  for (int t = 0; t < kCases; ++t) {
    const auto ks = static_cast<Eigen::Index>(2 + rng.index(5));
    const auto kt = static_cast<Eigen::Index>(1 + rng.index(5));
    const auto d = static_cast<Eigen::Index>(1 + rng.index(6));
    const auto s = random_matrix(rng, ks, d), tg = random_matrix(rng, kt, d);
    const double loss = alignment::cycle_consistency_loss(s, tg).loss;
    EXPECT_GE(loss, 0.0);
    EXPECT_LT(alignment::check_gradients(s, tg), 1e-6) << "case " << t;
    const Eigen::RowVectorXd shift = 3.0 * random_matrix(rng, 1, d);
    EXPECT_NEAR(alignment::cycle_consistency_loss(s.rowwise() + shift, tg.rowwise() + shift).loss, loss, 1e-10);
  }
}

TEST(Property, JsonlRoundTrip) {
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const auto ds = random_dataset(rng, 1 + static_cast<int>(rng.index(4)), 10, Domain::kSource);
    std::ostringstream out;
    annotations::write_jsonl(ds, out);
    const auto back = annotations::parse_jsonl(out.str());
    // Pixel coordinates pass through one multiply and one divide, so
    // non-integer boxes come back within rounding of the original.
    EXPECT_EQ(back.classes, ds.classes);
    EXPECT_EQ(back.images, ds.images);
    ASSERT_EQ(back.annotations.size(), ds.annotations.size());
    for (std::size_t i = 0; i < ds.annotations.size(); ++i) {
      const auto& a = back.annotations[i];
      const auto& b = ds.annotations[i];
      EXPECT_EQ(a.image_id, b.image_id);
      EXPECT_EQ(a.class_id, b.class_id);
      EXPECT_NEAR(a.cx, b.cx, 1e-12);
      EXPECT_NEAR(a.cy, b.cy, 1e-12);
      EXPECT_NEAR(a.w, b.w, 1e-12);
      EXPECT_NEAR(a.h, b.h, 1e-12);
    }
  }
}

TEST(Property, NormalizeInverse) {
  Rng rng(6);
  for (int t = 0; t < 1000; ++t) {
    const annotations::ImageInfo image{"i", std::floor(rng.uniform(10, 4000)), std::floor(rng.uniform(10, 4000))};
    annotations::PixelBox p;
    p.w = rng.uniform(0.5, image.width);
    p.h = rng.uniform(0.5, image.height);
    p.x = rng.uniform(0.0, image.width - p.w);
    p.y = rng.uniform(0.0, image.height - p.h);
    const auto back = annotations::denormalize_box(annotations::normalize_box(p, image, 0, false), image);
    EXPECT_LE(std::abs(back.x - p.x), 1e-9 * std::max(1.0, p.x));
    EXPECT_LE(std::abs(back.y - p.y), 1e-9 * std::max(1.0, p.y));
    EXPECT_LE(std::abs(back.w - p.w), 1e-9 * p.w);
    EXPECT_LE(std::abs(back.h - p.h), 1e-9 * p.h);
  }
}

TEST(Property, RisksLinearAndIdentityExact) {
  Rng rng(7);
  for (int t = 0; t < kCases; ++t) {
    const verify::Support sup{1 + rng.index(4), 1 + rng.index(4), 1 + rng.index(4)};
    std::vector<double> ms(sup.cells()), mt(sup.cells());
    for (auto& m : ms) m = 1e-3 + rng.uniform();
    for (auto& m : mt) m = 1e-3 + rng.uniform();
    const auto s = verify::DiscreteJointDistribution::normalized(sup, ms);
    const auto tg = verify::DiscreteJointDistribution::normalized(sup, mt);
    verify::LossTable a{sup, {}}, b{sup, {}}, ab{sup, {}};
    for (std::size_t i = 0; i < sup.cells(); ++i) {
      a.values.push_back(rng.uniform(0, 10));
      b.values.push_back(rng.uniform(0, 10));
      ab.values.push_back(a.values[i] + b.values[i]);
    }
    const auto w = verify::exact_weights(s, tg);
    const double la = verify::lhs_reweighted_source_risk(s, w, a);
    const double lb = verify::lhs_reweighted_source_risk(s, w, b);
    EXPECT_NEAR(verify::lhs_reweighted_source_risk(s, w, ab), la + lb, 1e-12 * std::max(1.0, la + lb));
    EXPECT_NEAR(la, verify::rhs_target_reference_risk(s, tg, a), 1e-10);
  }
}

}  // namespace
}  // namespace care
