// Copyright 2026 The roadloc Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "roadloc/dataio.hpp"
#include "roadloc/error.hpp"
#include "roadloc/losses.hpp"
#include "roadloc/pipeline.hpp"

namespace roadloc {
namespace {

constexpr int kTrials = 100;
constexpr double kRelTol = 1e-4;

// Relative agreement; the floor absorbs central-difference roundoff (~1e-10)
// on entries that are ~0.
::testing::AssertionResult gradients_agree(std::span<const double> analytic, std::span<const double> numeric) {
  if (analytic.size() != numeric.size()) return ::testing::AssertionFailure() << "size mismatch";
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    const double scale = std::max({std::abs(analytic[i]), std::abs(numeric[i]), 1e-5});
    if (std::abs(analytic[i] - numeric[i]) > kRelTol * scale) {
      return ::testing::AssertionFailure() << "entry " << i << ": analytic " << analytic[i]
                                           << " vs numeric " << numeric[i];
    }
  }
  return ::testing::AssertionSuccess();
}

Grid single_cell(double v) { return Grid(1, 1, 1, v); }

// A ground point in view of scene A, used as the P2 anchor.
WorldPoint anchor_in_view(const CalibrationParams& p, double u = 960, double v = 800) {
  return oracle::backproject(p, {u, v}, 0.0);
}

// Corners from P2 by hand: +w along x for P1/P4/P5/P8, +l along y for
// P3/P4/P7/P8, +h along z for the top face.
VertexSet corners_by_hand(const WorldPoint& p2, const Dimension3D& d) {
  const double dx[8] = {d.w, 0, 0, d.w, d.w, 0, 0, d.w};
  const double dy[8] = {0, 0, d.l, d.l, 0, 0, d.l, d.l};
  const double dz[8] = {0, 0, 0, 0, d.h, d.h, d.h, d.h};
  VertexSet out;
  for (int i = 0; i < 8; ++i) out[i] = {p2.x + dx[i], p2.y + dy[i], p2.z + dz[i]};
  return out;
}

ImageOctet rect_octet(const Rect2D& r) {
  return {ImagePoint{r.max_u, r.max_v}, {r.min_u, r.max_v}, {r.min_u, r.min_v}, {r.max_u, r.min_v},
          {r.max_u, r.max_v}, {r.min_u, r.max_v}, {r.min_u, r.min_v}, {r.max_u, r.min_v}};
}

TEST(FocalLoss, PositiveCellAtHalf) {
  EXPECT_NEAR(focal_loss(single_cell(0.5), single_cell(1.0)), 0.25 * std::log(2.0), 1e-12);
  EXPECT_NEAR(focal_loss(single_cell(0.5), single_cell(1.0)), 0.17329, 5e-6);
}

TEST(FocalLoss, PenaltyReducedNegativeCell) {
  // No positives, so the normalizer clamps to 1.
  const double expected = 0.25 * std::pow(0.5, 4) * std::log(2.0);
  EXPECT_NEAR(focal_loss(single_cell(0.5), single_cell(0.5)), expected, 1e-12);
  EXPECT_NEAR(focal_loss(single_cell(0.5), single_cell(0.5)), 0.01083, 5e-6);
}

TEST(FocalLoss, BinaryExactPredictionIsNearZero) {
  Grid gt(16, 16, 3, 0.0);
  gt.at(4, 5, 0) = 1.0;
  gt.at(10, 2, 2) = 1.0;
  EXPECT_LE(focal_loss(gt, gt), 1e-5);
  EXPECT_GE(focal_loss(gt, gt), 0.0);
}

TEST(FocalLoss, NormalizesByPositiveCount) {
  Grid pred(1, 2, 1, 0.5), gt(1, 2, 1, 1.0);
  EXPECT_NEAR(focal_loss(pred, gt), 0.25 * std::log(2.0), 1e-12);
}

TEST(FocalLoss, DecreasesAsPositiveMovesTowardOne) {
  Grid gt(3, 3, 1, 0.2);
  gt.at(1, 1, 0) = 1.0;
  Grid pred(3, 3, 1, 0.3);
  double prev = std::numeric_limits<double>::infinity();
  for (double p = 0.01; p < 1.0; p += 0.01) {
    pred.at(1, 1, 0) = p;
    const double loss = focal_loss(pred, gt);
    EXPECT_LT(loss, prev) << p;
    prev = loss;
  }
}

TEST(FocalLoss, ShapeMismatchThrows) {
  try {
    focal_loss(Grid(2, 2, 1), Grid(2, 3, 1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kShapeMismatch);
  }
}

TEST(FocalLoss, GradientVanishesAtExactPeaks) {
  Grid gt(4, 4, 1, 0.0);
  gt.at(2, 1, 0) = 1.0;
  Grid grad;
  focal_loss(gt, gt, {}, &grad);
  auto f = [&](const Grid& g) { return focal_loss(g, gt); };
  const Grid fd = finite_difference_gradient(f, gt, 1e-6);
  EXPECT_NEAR(grad.at(2, 1, 0), 0.0, 1e-9);
  EXPECT_NEAR(fd.at(2, 1, 0), 0.0, 1e-5);
}

TEST(FocalLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> p(0.02, 0.98), g(0.0, 0.95);
  std::bernoulli_distribution positive(0.2);
  for (int t = 0; t < kTrials; ++t) {
    Grid pred(3, 4, 2), gt(3, 4, 2);
    for (std::size_t i = 0; i < pred.size(); ++i) {
      pred.data()[i] = p(rng);
      gt.data()[i] = positive(rng) ? 1.0 : g(rng);
    }
    Grid grad;
    focal_loss(pred, gt, {}, &grad);
    const Grid fd = finite_difference_gradient([&](const Grid& x) { return focal_loss(x, gt); }, pred, 1e-6);
    ASSERT_TRUE(gradients_agree(grad.data(), fd.data())) << "trial " << t;
  }
}

TEST(PeakL1Loss, OffsetExample) {
  Grid gt(4, 4, 2, 0.0), pred(4, 4, 2, 0.0);
  pred.at(1, 2, 0) = 0.25;
  pred.at(1, 2, 1) = -0.25;
  const std::vector<PeakTarget> peaks{{1, 2, 0, {}}};
  EXPECT_DOUBLE_EQ(offset_loss(pred, gt, peaks), 0.5);
}

TEST(PeakL1Loss, MeanOverPeaks) {
  Grid gt(4, 4, 2, 0.0), pred(4, 4, 2, 0.0);
  pred.at(0, 0, 0) = 0.3;
  pred.at(1, 1, 1) = 0.2;
  pred.at(2, 2, 0) = 0.1;
  pred.at(2, 2, 1) = 0.4;
  pred.at(3, 3, 0) = 9.0;  // not a peak, ignored
  const std::vector<PeakTarget> peaks{{0, 0, 0, {}}, {1, 1, 0, {}}, {2, 2, 0, {}}};
  EXPECT_NEAR(offset_loss(pred, gt, peaks), (0.3 + 0.2 + 0.5) / 3.0, 1e-12);
}

TEST(PeakL1Loss, VertexExample) {
  Grid gt(4, 4, 16, 3.0);
  Grid pred = gt;
  for (int c = 0; c < 16; ++c) pred.at(2, 3, c) += 0.1;
  const std::vector<PeakTarget> peaks{{2, 3, 0, {}}};
  EXPECT_NEAR(vertex_loss(pred, gt, peaks), 1.6, 1e-12);
}

TEST(PeakL1Loss, DimensionExample) {
  Grid gt(2, 2, 3, 0.0), pred(2, 2, 3, 0.0);
  const double g[3] = {4.62, 1.82, 1.45};
  const double d[3] = {0.19, -0.01, 0.10};
  for (int c = 0; c < 3; ++c) {
    gt.at(0, 1, c) = g[c];
    pred.at(0, 1, c) = g[c] + d[c];
  }
  const std::vector<PeakTarget> peaks{{0, 1, 0, {}}};
  EXPECT_NEAR(dim_loss(pred, gt, peaks), 0.30, 1e-12);
}

TEST(PeakL1Loss, EmptyMaskAndExactAreZero) {
  Grid a(3, 3, 2, 1.0), b(3, 3, 2, 2.0);
  EXPECT_EQ(offset_loss(a, b, {}), 0.0);
  const std::vector<PeakTarget> peaks{{1, 1, 0, {}}};
  EXPECT_EQ(offset_loss(a, a, peaks), 0.0);
}

TEST(PeakL1Loss, SubgradientTakesThreeValues) {
  Grid gt(3, 3, 3, 0.0), pred(3, 3, 3, 0.0);
  pred.at(0, 0, 0) = 0.5;
  pred.at(0, 0, 1) = -0.5;
  pred.at(2, 1, 2) = 0.7;
  const std::vector<PeakTarget> peaks{{0, 0, 0, {}}, {2, 1, 0, {}}};
  Grid grad;
  dim_loss(pred, gt, peaks, &grad);
  for (double g : grad.data()) EXPECT_TRUE(g == 0.0 || g == 0.5 || g == -0.5) << g;
  EXPECT_EQ(grad.at(0, 0, 0), 0.5);
  EXPECT_EQ(grad.at(0, 0, 1), -0.5);
  EXPECT_EQ(grad.at(0, 0, 2), 0.0);  // exact equality takes subgradient 0
}

TEST(PeakL1Loss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> val(-2.0, 2.0), off(0.01, 0.5);
  std::bernoulli_distribution flip(0.5);
  for (int t = 0; t < kTrials; ++t) {
    const int ch = t % 3 == 0 ? 2 : (t % 3 == 1 ? 16 : 3);
    Grid gt(5, 5, ch), pred(5, 5, ch);
    for (std::size_t i = 0; i < gt.size(); ++i) {
      gt.data()[i] = val(rng);
      pred.data()[i] = gt.data()[i] + (flip(rng) ? 1 : -1) * off(rng);  // away from kinks
    }
    const std::vector<PeakTarget> peaks{{0, 1, 0, {}}, {3, 3, 0, {}}, {4, 0, 0, {}}};
    Grid grad;
    peak_l1_loss(pred, gt, peaks, &grad);
    const Grid fd =
        finite_difference_gradient([&](const Grid& x) { return peak_l1_loss(x, gt, peaks); }, pred, 1e-6);
    ASSERT_TRUE(gradients_agree(grad.data(), fd.data())) << "trial " << t;
  }
}

class ReprojectionLoss : public ::testing::Test {
 protected:
  SceneMeta scene = reference_scenes().at(0);
  ProjectionMatrix proj = scene.projection();
  Dimension3D dim{4.6, 1.8, 1.5};

  ReprojectionSample exact_sample(const WorldPoint& p2) const {
    ReprojectionSample s;
    s.anchor_p2 = p2;
    s.pred_dim = dim;
    const VertexSet c = corners_by_hand(p2, dim);
    for (int i = 0; i < 8; ++i) s.pred_vertices[i] = oracle::project(scene.params, c[i]);
    return s;
  }
};

TEST_F(ReprojectionLoss, ExactPredictionIsZero) {
  const std::vector<ReprojectionSample> s{exact_sample(anchor_in_view(scene.params))};
  EXPECT_LT(reprojection_loss(proj, s), 1e-6);
}

TEST_F(ReprojectionLoss, UnitShiftInUGivesEight) {
  auto s = exact_sample(anchor_in_view(scene.params));
  for (auto& p : s.pred_vertices) p.u += 1.0;
  const std::vector<ReprojectionSample> v{s};
  EXPECT_NEAR(reprojection_loss(proj, v), 8.0, 1e-6);
}

TEST_F(ReprojectionLoss, LengthErrorMatchesIndependentProjection) {
  const WorldPoint p2 = anchor_in_view(scene.params);
  auto s = exact_sample(p2);
  s.pred_dim.l += 0.1;
  Dimension3D longer = dim;
  longer.l += 0.1;
  const VertexSet moved = corners_by_hand(p2, longer);
  double expected = 0.0;
  for (int i = 0; i < 8; ++i) {
    const ImagePoint q = oracle::project(scene.params, moved[i]);
    expected += std::abs(q.u - s.pred_vertices[i].u) + std::abs(q.v - s.pred_vertices[i].v);
  }
  const std::vector<ReprojectionSample> v{s};
  const double loss = reprojection_loss(proj, v);
  EXPECT_NEAR(loss, expected, 1e-6 * expected);
  EXPECT_GT(loss, 0.0);
}

TEST_F(ReprojectionLoss, InvariantToObjectOrder) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(500, 1400), v(650, 1000), jitter(-3, 3);
  std::vector<ReprojectionSample> s;
  for (int k = 0; k < 6; ++k) {
    auto smp = exact_sample(anchor_in_view(scene.params, u(rng), v(rng)));
    for (auto& p : smp.pred_vertices) p = {p.u + jitter(rng), p.v + jitter(rng)};
    s.push_back(smp);
  }
  const double base = reprojection_loss(proj, s);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(s.begin(), s.end(), rng);
    EXPECT_NEAR(reprojection_loss(proj, s), base, 1e-9 * base);
  }
}

TEST_F(ReprojectionLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> u(400, 1500), v(700, 1050), len(3.5, 12), wid(1.5, 2.6), hei(1.3, 3.5);
  std::uniform_real_distribution<double> off(0.3, 4.0);
  std::bernoulli_distribution flip(0.5);
  for (int t = 0; t < kTrials; ++t) {
    const WorldPoint p2 = anchor_in_view(scene.params, u(rng), v(rng));
    const Dimension3D d{len(rng), wid(rng), hei(rng)};
    const VertexSet c = corners_by_hand(p2, d);
    ImageOctet target;
    for (int i = 0; i < 8; ++i) {
      const ImagePoint q = oracle::project(scene.params, c[i]);
      target[i] = {q.u + (flip(rng) ? 1 : -1) * off(rng), q.v + (flip(rng) ? 1 : -1) * off(rng)};
    }
    // x = (l, w, h, u1, v1, ..., u8, v8)
    std::vector<double> x{d.l, d.w, d.h};
    for (const auto& q : target) {
      x.push_back(q.u);
      x.push_back(q.v);
    }
    auto loss = [&](std::span<const double> y) {
      ReprojectionSample s;
      s.anchor_p2 = p2;
      s.pred_dim = {y[0], y[1], y[2]};
      for (int i = 0; i < 8; ++i) s.pred_vertices[i] = {y[3 + 2 * i], y[4 + 2 * i]};
      return reprojection_loss(proj, std::span<const ReprojectionSample>(&s, 1));
    };
    ReprojectionSample s;
    s.anchor_p2 = p2;
    s.pred_dim = d;
    s.pred_vertices = target;
    std::vector<ReprojectionGradient> g;
    reprojection_loss(proj, std::span<const ReprojectionSample>(&s, 1), &g);
    std::vector<double> analytic(g[0].d_dim.begin(), g[0].d_dim.end());
    analytic.insert(analytic.end(), g[0].d_vertices.begin(), g[0].d_vertices.end());
    const auto fd = finite_difference_gradient(loss, x, 1e-6);
    ASSERT_TRUE(gradients_agree(analytic, fd)) << "trial " << t;
  }
}

TEST_F(ReprojectionLoss, GridFormGradientMatchesFiniteDifferences) {
  const auto [sc, frame] = synth_scene(scene, {.n_vehicles = 3, .seed = 4});
  const GridConfig cfg;
  const TargetMaps gt = encode_frame(sc, frame, cfg);
  const ProjectionMatrix in_proj = input_mapping(sc, cfg).input_projection;
  ASSERT_FALSE(gt.peaks.empty());
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> off(0.05, 0.5);
  std::bernoulli_distribution flip(0.5);
  Grid ms = gt.ms, mv = gt.mv;
  for (const auto& pk : gt.peaks) {
    for (int c = 0; c < 3; ++c) ms.at(pk.row, pk.col, c) += (flip(rng) ? 1 : -1) * off(rng);
    for (int c = 0; c < 16; ++c) mv.at(pk.row, pk.col, c) += (flip(rng) ? 1 : -1) * off(rng);
  }
  Grid gms, gmv;
  reprojection_loss(in_proj, ms, mv, gt.stride, gt.peaks, &gms, &gmv);
  for (const auto& pk : gt.peaks) {
    std::vector<double> x, analytic;
    for (int c = 0; c < 3; ++c) {
      x.push_back(ms.at(pk.row, pk.col, c));
      analytic.push_back(gms.at(pk.row, pk.col, c));
    }
    for (int c = 0; c < 16; ++c) {
      x.push_back(mv.at(pk.row, pk.col, c));
      analytic.push_back(gmv.at(pk.row, pk.col, c));
    }
    auto loss = [&](std::span<const double> y) {
      Grid a = ms, b = mv;
      for (int c = 0; c < 3; ++c) a.at(pk.row, pk.col, c) = y[c];
      for (int c = 0; c < 16; ++c) b.at(pk.row, pk.col, c) = y[3 + c];
      return reprojection_loss(in_proj, a, b, gt.stride, gt.peaks);
    };
    EXPECT_TRUE(gradients_agree(analytic, finite_difference_gradient(loss, x, 1e-6)));
  }
}

TEST(IouConstraintLoss, ExactIsZero) {
  const ImageOctet o = rect_octet({10, 20, 60, 50});
  const std::vector<ImageOctet> a{o};
  EXPECT_NEAR(iou_constraint_loss(a, a), 0.0, 1e-12);
}

TEST(IouConstraintLoss, ConcentricQuarterArea) {
  const std::vector<ImageOctet> pred{rect_octet({-1, -1, 1, 1})};
  const std::vector<ImageOctet> gt{rect_octet({-2, -2, 2, 2})};
  EXPECT_NEAR(iou_constraint_loss(pred, gt), 0.75, 1e-12);
}

TEST(IouConstraintLoss, MatchesRectAndCiouOracles) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> c(100, 400), j(-30, 30);
  for (int t = 0; t < 50; ++t) {
    ImageOctet p, g;
    for (int i = 0; i < 8; ++i) {
      g[i] = {c(rng), c(rng)};
      p[i] = {g[i].u + j(rng), g[i].v + j(rng)};
    }
    auto bounds = [](const ImageOctet& o) {
      Rect2D r{o[0].u, o[0].v, o[0].u, o[0].v};
      for (const auto& q : o) {
        r.min_u = std::min(r.min_u, q.u);
        r.min_v = std::min(r.min_v, q.v);
        r.max_u = std::max(r.max_u, q.u);
        r.max_v = std::max(r.max_v, q.v);
      }
      return r;
    };
    const std::vector<ImageOctet> a{p}, b{g};
    EXPECT_NEAR(iou_constraint_loss(a, b), oracle::ciou(bounds(p), bounds(g)), 1e-9);
  }
}

TEST(IouConstraintLoss, CountMismatchThrows) {
  const std::vector<ImageOctet> a{rect_octet({0, 0, 1, 1})};
  EXPECT_THROW(iou_constraint_loss(a, {}), Error);
}

TEST(IouConstraintLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> c(100, 400), j(-40, 40);
  for (int t = 0; t < kTrials; ++t) {
    ImageOctet p, g;
    for (int i = 0; i < 8; ++i) {
      g[i] = {c(rng), c(rng)};
      p[i] = {g[i].u + j(rng), g[i].v + j(rng)};
    }
    std::vector<double> x;
    for (const auto& q : p) {
      x.push_back(q.u);
      x.push_back(q.v);
    }
    auto loss = [&](std::span<const double> y) {
      ImageOctet o;
      for (int i = 0; i < 8; ++i) o[i] = {y[2 * i], y[2 * i + 1]};
      return iou_constraint_loss(std::span<const ImageOctet>(&o, 1), std::span<const ImageOctet>(&g, 1));
    };
    std::vector<std::array<double, 16>> grads;
    iou_constraint_loss(std::span<const ImageOctet>(&p, 1), std::span<const ImageOctet>(&g, 1), &grads);
    ASSERT_TRUE(gradients_agree(grads[0], finite_difference_gradient(loss, x, 1e-6))) << "trial " << t;
  }
}

TEST(TotalLoss, UnitComponentsWithDefaultWeights) {
  EXPECT_NEAR(total_loss({1, 1, 1, 1, 1, 1}), 3.3, 1e-12);
  EXPECT_EQ(total_loss({}), 0.0);
}

TEST(TotalLoss, LinearInEachComponent) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> r(0, 5);
  const LossWeights w{r(rng), r(rng), r(rng), r(rng), r(rng), r(rng)};
  for (int t = 0; t < 50; ++t) {
    LossComponents a{r(rng), r(rng), r(rng), r(rng), r(rng), r(rng)};
    const double expected = w.lambda_c * a.focal + w.lambda_co * a.offset + w.lambda_v * a.vertex +
                            w.lambda_s * a.dim + w.lambda_proj * a.reprojection + w.lambda_iou * a.iou;
    EXPECT_NEAR(total_loss(a, w), expected, 1e-12);
    LossComponents b = a;
    b.vertex *= 2;
    EXPECT_NEAR(total_loss(b, w) - total_loss(a, w), w.lambda_v * a.vertex, 1e-12);
  }
}

TEST(TotalLoss, NegativeWeightRejected) {
  LossWeights w;
  w.lambda_s = -0.1;
  EXPECT_THROW(w.validate(), Error);
}

TEST(EvaluateLosses, EncodedTargetsScoreZero) {
  const SceneMeta scene = reference_scenes().at(0);
  const auto [sc, frame] = synth_scene(scene, {.n_vehicles = 5, .seed = 9});
  const GridConfig cfg;
  const TargetMaps gt = encode_frame(sc, frame, cfg);
  TargetMaps pred = gt;
  std::fill(pred.mc.data().begin(), pred.mc.data().end(), 0.0);
  for (const auto& pk : gt.peaks) pred.mc.at(pk.row, pk.col, pk.class_id) = 1.0;
  const LossComponents c = evaluate_losses(pred, gt, input_mapping(sc, cfg).input_projection);
  EXPECT_LE(c.focal, 1e-5);
  EXPECT_LT(c.offset, 1e-6);
  EXPECT_LT(c.vertex, 1e-6);
  EXPECT_LT(c.dim, 1e-6);
  EXPECT_LT(c.reprojection, 1e-6);
  EXPECT_LT(c.iou, 1e-6);
}

TEST(FiniteDifference, RejectsNonPositiveEpsilon) {
  const std::vector<double> x{1.0};
  auto f = [](std::span<const double> y) { return y[0]; };
  EXPECT_THROW(finite_difference_gradient(f, x, 0.0), Error);
}

TEST(FiniteDifference, ExactOnQuadratic) {
  const std::vector<double> x{1.0, -2.0, 0.5};
  auto f = [](std::span<const double> y) { return y[0] * y[0] + 3 * y[1] * y[2]; };
  const auto g = finite_difference_gradient(f, x, 1e-4);
  EXPECT_NEAR(g[0], 2.0, 1e-8);
  EXPECT_NEAR(g[1], 1.5, 1e-8);
  EXPECT_NEAR(g[2], -6.0, 1e-8);
}

}  // namespace
}  // namespace roadloc
