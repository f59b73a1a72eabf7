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

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "roadloc/calib.hpp"
#include "roadloc/dataio.hpp"
#include "roadloc/error.hpp"

namespace roadloc {
namespace {

CalibrationParams scene_a() { return reference_scenes()[0].params; }

std::vector<GroundMark> synth_marks(const CalibrationParams& p) {
  const ProjectionMatrix proj = build_projection(p);
  std::vector<GroundMark> marks;
  for (double y : {15.0, 30.0, 45.0}) {
    for (double x : {-4.0, 3.0}) {
      marks.push_back({world_to_image(proj, {x, y, 0}), world_to_image(proj, {x, y + 6.0, 0}), 6.0,
                       MarkKind::kAlongRoad});
    }
    marks.push_back({world_to_image(proj, {-1.75, y, 0}), world_to_image(proj, {1.75, y, 0}), 3.5,
                     MarkKind::kAcrossRoad});
  }
  return marks;
}

TEST(Intrinsics, UnitFocalAtOriginIsIdentity) {
  EXPECT_TRUE(build_intrinsics({1, 0.1, 0, 1, 0, 0}).isApprox(Mat3::Identity(), 0));
}

TEST(Intrinsics, ReferenceSceneFocal) {
  Mat3 k = build_intrinsics({2878.13, 0.2, 0, 1, 960, 540});
  Mat3 expected;
  expected << 2878.13, 0, 960, 0, 2878.13, 540, 0, 0, 1;
  EXPECT_EQ(k, expected);
  k = build_intrinsics({2, 0.2, 0, 1, 3, 4});
  expected << 2, 0, 3, 0, 2, 4, 0, 0, 1;
  EXPECT_EQ(k, expected);
}

TEST(Rotation, ZeroAngles) {
  Mat3 expected;
  expected << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_TRUE(build_rotation(0, 0).isApprox(expected, 1e-15));
}

TEST(Rotation, MatchesAxisAngleComposition) {
  EXPECT_TRUE(build_rotation(0.17874, 0.26604).isApprox(oracle::rotation(0.17874, 0.26604), 1e-14));
}

TEST(Rotation, OrthonormalWithUnitDeterminant) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ang(-1.5, 1.5);
  for (int i = 0; i < 1000; ++i) {
    const Mat3 r = build_rotation(ang(rng), ang(rng));
    EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(r.determinant(), 1.0, 1e-12);
  }
}

TEST(Projection, ZeroAngleUnitCase) {
  Mat34 expected;
  expected << 1, 0, 0, 0, 0, 0, -1, 0, 0, 1, 0, 0;
  // h = 0 is outside the valid range, so build the product directly.
  const Mat3 r = build_rotation(0, 0);
  Mat34 t = Mat34::Zero();
  t.leftCols<3>() = Mat3::Identity();
  EXPECT_TRUE((build_intrinsics({1, 0.1, 0, 1, 0, 0}) * r * t).isApprox(expected));
  const ProjectionMatrix h = build_projection({1, 0.0, 0.0, 1e-300, 0, 0});
  EXPECT_TRUE(h.m.isApprox(expected, 1e-12));
}

TEST(Projection, ReferenceSceneEqualsMatrixProduct) {
  const CalibrationParams p = scene_a();
  Mat3 k;
  k << p.f, 0, p.cx, 0, p.f, p.cy, 0, 0, 1;
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t(2, 3) = -p.h;
  const Mat34 expected = k * oracle::rotation(p.phi, p.theta) * t.topRows<3>();
  EXPECT_TRUE(build_projection(p).m.isApprox(expected, 1e-12));
}

TEST(Projection, ScalingIntrinsicRowsScalesMatrixRows) {
  const ProjectionMatrix h = build_projection(scene_a());
  const ProjectionMatrix s = scale_projection(h, 2.5, 2.5);
  EXPECT_TRUE(s.m.topRows<2>().isApprox(2.5 * h.m.topRows<2>(), 1e-14));
  EXPECT_EQ(s.m.row(2), h.m.row(2));
}

TEST(WorldToImage, OriginLandsBelowPrincipalPointForAnyPan) {
  for (double theta : {-0.5, -0.1, 0.0, 0.26604, 0.7}) {
    CalibrationParams p = scene_a();
    p.theta = theta;
    const ImagePoint q = world_to_image(build_projection(p), {0, 0, 0});
    EXPECT_NEAR(q.u, p.cx, 1e-9);
    EXPECT_NEAR(q.v, p.cy + p.f / std::tan(p.phi), 1e-9);
  }
}

TEST(WorldToImage, ReferenceScenePointMatchesPinholeOracle) {
  const CalibrationParams p = scene_a();
  const ImagePoint q = world_to_image(build_projection(p), {0, 50, 0});
  const ImagePoint e = oracle::project(p, {0, 50, 0});
  EXPECT_NEAR(q.u, e.u, 1e-8);
  EXPECT_NEAR(q.v, e.v, 1e-8);
}

TEST(WorldToImage, CameraPlaneIsDegenerate) {
  const CalibrationParams p = scene_a();
  // A point level with the camera center projects to infinity.
  const Eigen::Vector3d forward = oracle::rotation(p.phi, p.theta).row(2).transpose();
  const Eigen::Vector3d side = forward.cross(Eigen::Vector3d::UnitZ()).normalized();
  try {
    world_to_image(build_projection(p), {side.x(), side.y(), p.h + side.z()});
    FAIL() << "expected a degenerate projection";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateProjection);
  }
}

TEST(ImageToWorld, PrincipalPointHitsOpticalAxisGroundPoint) {
  CalibrationParams p = scene_a();
  p.theta = 0.0;
  const WorldPoint w = image_to_world(build_projection(p), {p.cx, p.cy}, 0.0);
  EXPECT_NEAR(w.x, 0.0, 1e-9);
  EXPECT_NEAR(w.y, p.h / std::tan(p.phi), 1e-9);
  EXPECT_EQ(w.z, 0.0);
}

TEST(ImageToWorld, MatchesRayOracle) {
  const CalibrationParams p = scene_a();
  const WorldPoint w = image_to_world(build_projection(p), {700, 900}, 0.7);
  const WorldPoint e = oracle::backproject(p, {700, 900}, 0.7);
  EXPECT_NEAR(w.x, e.x, 1e-9);
  EXPECT_NEAR(w.y, e.y, 1e-9);
}

TEST(ImageToWorld, HorizonIsDegenerate) {
  const CalibrationParams p = scene_a();
  const VanishingPoint vp = vp_from_params(p);
  try {
    image_to_world(build_projection(p), {vp.u0, vp.v0}, 0.0);
    FAIL() << "expected a degenerate backprojection";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateBackprojection);
  }
}

TEST(RoundTrip, RandomParamsAndGroundPoints) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> f(500, 5000), phi(0.05, 0.6), theta(-0.5, 0.5), h(5, 15);
  std::uniform_real_distribution<double> x(-20, 20), y(5, 150);
  for (int i = 0; i < 1000; ++i) {
    const CalibrationParams p{f(rng), phi(rng), theta(rng), h(rng), 960, 540};
    const ProjectionMatrix proj = build_projection(p);
    const WorldPoint w{x(rng), y(rng), 0.0};
    const WorldPoint back = image_to_world(proj, world_to_image(proj, w), 0.0);
    ASSERT_LT(std::hypot(back.x - w.x, back.y - w.y), 1e-6) << "sample " << i;
  }
}

TEST(RoundTrip, ElevatedPointsWithKnownHeight) {
  const ProjectionMatrix proj = build_projection(scene_a());
  for (double z : {0.3, 0.7, 1.4}) {
    const WorldPoint w{2.5, 40.0, z};
    const WorldPoint back = image_to_world(proj, world_to_image(proj, w), z);
    EXPECT_NEAR(back.x, w.x, 1e-9);
    EXPECT_NEAR(back.y, w.y, 1e-9);
  }
}

TEST(VanishingPoint, ZeroPanSitsOnPrincipalColumn) {
  CalibrationParams p = scene_a();
  p.theta = 0.0;
  EXPECT_DOUBLE_EQ(vp_from_params(p).u0, p.cx);
  p.phi = 0.0;
  const VanishingPoint vp = vp_from_params(p);
  EXPECT_DOUBLE_EQ(vp.u0, p.cx);
  EXPECT_DOUBLE_EQ(vp.v0, p.cy);
}

TEST(VanishingPoint, MatchesFarAlongRoadPoint) {
  const CalibrationParams p = scene_a();
  const VanishingPoint vp = vp_from_params(p);
  const ImagePoint far = world_to_image(build_projection(p), {0, 1e9, 0});
  EXPECT_NEAR(vp.u0, far.u, 1e-3);
  EXPECT_NEAR(vp.v0, far.v, 1e-3);
}

TEST(VanishingPoint, AngleExtractionInvertsForKnownFocal) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> phi(0.05, 0.6), theta(-0.5, 0.5);
  for (int i = 0; i < 200; ++i) {
    const CalibrationParams p{2000, phi(rng), theta(rng), 8, 960, 540};
    const auto [ph, th] = angles_from_vp(vp_from_params(p), p.f, p.cx, p.cy);
    EXPECT_NEAR(ph, p.phi, 1e-10);
    EXPECT_NEAR(th, p.theta, 1e-10);
  }
}

TEST(Vwl, RecoversReferenceSceneFromSyntheticMarks) {
  const CalibrationParams p = scene_a();
  const VwlSolution s = solve_vwl(vp_from_params(p), synth_marks(p), 1920, 1080);
  EXPECT_LT(std::abs(s.params.f - p.f) / p.f, 0.01);
  EXPECT_LT(std::abs(s.params.h - p.h) / p.h, 0.01);
  EXPECT_LT(std::abs(s.params.phi - p.phi) / p.phi, 0.005);
  EXPECT_LT(std::abs(s.params.theta - p.theta) / std::abs(p.theta), 0.005);
  EXPECT_LT(s.residual, 1e-6);
}

TEST(Vwl, CenteredVanishingPointGivesZeroPan) {
  CalibrationParams p = scene_a();
  p.theta = 0.0;
  const VwlSolution s = solve_vwl(vp_from_params(p), synth_marks(p), 1920, 1080);
  EXPECT_EQ(s.params.theta, 0.0);
}

TEST(Vwl, NeedsBothMarkKinds) {
  const CalibrationParams p = scene_a();
  auto marks = synth_marks(p);
  std::erase_if(marks, [](const GroundMark& m) { return m.kind == MarkKind::kAcrossRoad; });
  try {
    solve_vwl(vp_from_params(p), marks, 1920, 1080);
    FAIL() << "expected InsufficientMarks";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInsufficientMarks);
  }
}

TEST(Vwl, InconsistentMarksDoNotConverge) {
  const CalibrationParams p = scene_a();
  auto marks = synth_marks(p);
  for (auto& m : marks) {
    if (m.kind == MarkKind::kAcrossRoad) m.world_length *= 4.0;
  }
  VwlOptions opts;
  opts.tolerance = 1e-3;
  try {
    solve_vwl(vp_from_params(p), marks, 1920, 1080, opts);
    FAIL() << "expected NoConvergence";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNoConvergence);
  }
}

TEST(Mirror, FlippedCalibrationProjectsMirroredWorld) {
  const CalibrationParams p = scene_a();
  const CalibrationParams m = mirror_params(p, 1920);
  const ProjectionMatrix hp = build_projection(p), hm = build_projection(m);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> x(-10, 10), y(10, 100), z(0, 3);
  for (int i = 0; i < 100; ++i) {
    const WorldPoint w{x(rng), y(rng), z(rng)};
    const ImagePoint q = world_to_image(hp, w);
    const ImagePoint qm = world_to_image(hm, {-w.x, w.y, w.z});
    EXPECT_NEAR(qm.u, 1919.0 - q.u, 1e-8);
    EXPECT_NEAR(qm.v, q.v, 1e-8);
  }
  Eigen::Matrix4d flip_x = Eigen::Matrix4d::Identity();
  flip_x(0, 0) = -1;
  const Mat34 composed = mirror_u_matrix(1920) * hp.m * flip_x;
  EXPECT_TRUE(hm.m.isApprox(composed, 1e-12));
}

TEST(Params, InvalidValuesRejected) {
  EXPECT_THROW((CalibrationParams{0, 0.2, 0, 8, 960, 540}.validate()), Error);
  EXPECT_THROW((CalibrationParams{1000, 0.2, 0, -1, 960, 540}.validate()), Error);
  EXPECT_THROW((CalibrationParams{NAN, 0.2, 0, 8, 960, 540}.validate()), Error);
}

}  // namespace
}  // namespace roadloc
