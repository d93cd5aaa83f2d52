/*
 * Copyright 2026 The ertalign Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ertalign/error.h"
#include "ertalign/heatmap.h"
#include "ertalign/pose_init.h"
#include "ertalign/random.h"
#include "test_util.h"

namespace ertalign {
namespace {

using testing::face24_model;

constexpr double kDeg = std::numbers::pi / 180.0;

RigidPose make_pose(double yaw, double pitch, double roll, double depth,
                    Eigen::Vector2d shift = {0, 0}) {
  RigidPose p;
  p.camera = Camera::for_crop(160, 160);
  p.rotation = rotation_from_euler(yaw, pitch, roll);
  p.translation = {shift.x(), shift.y(), depth};
  return p;
}

std::vector<Correspondence> correspondences(const Model3D& m, const RigidPose& pose) {
  const Projection proj = project_points(m, pose);
  std::vector<Correspondence> out;
  for (int l = 0; l < m.size(); ++l) out.push_back({proj.coords[l], m.points[l]});
  return out;
}

TEST(Projection, OriginProjectsToCentre) {
  Model3D m;
  m.names = {"o"};
  m.points = {Eigen::Vector3d::Zero()};
  m.normals = {Eigen::Vector3d(0, 0, -1)};
  const Projection p = project_points(m, make_pose(0, 0, 0, 500));
  EXPECT_EQ(p.coords[0], (Point2{80, 80}));
  EXPECT_EQ(p.visibility[0], 1.0);
}

TEST(Projection, DoublingDepthHalvesOffsets) {
  const Model3D& m = face24_model();
  const RigidPose near = make_pose(0.3, -0.2, 0.1, 600);
  const RigidPose far = make_pose(0.3, -0.2, 0.1, 1200);
  const Projection a = project_points(m, near);
  const Projection b = project_points(m, far);
  for (int l = 0; l < m.size(); ++l) {
    // Hand projection: centre + focal / depth * (R X)_xy.
    const Eigen::Vector3d rx = near.rotation * m.points[l];
    EXPECT_NEAR(a.coords[l].x, 80 + 700.0 / 600 * rx.x(), 1e-9);
    EXPECT_NEAR(b.coords[l].x - 80, 0.5 * (a.coords[l].x - 80), 1e-9);
    EXPECT_NEAR(b.coords[l].y - 80, 0.5 * (a.coords[l].y - 80), 1e-9);
  }
}

TEST(Projection, ProfileHidesTheAvertedSide) {
  const Model3D& m = face24_model();
  const auto& schema = testing::face24_schema();
  // Positive yaw turns the face towards the image left, away from its right
  // (image-right) ear.
  const Projection p = project_points(m, make_pose(90 * kDeg, 0, 0, 800));
  const Projection q = project_points(m, make_pose(-90 * kDeg, 0, 0, 800));
  const int right_ear = *schema.index_of("right_ear_top");
  const int left_ear = *schema.index_of("left_ear_top");
  EXPECT_NE(p.visibility[right_ear], q.visibility[right_ear]);
  EXPECT_NE(p.visibility[left_ear], q.visibility[left_ear]);
  EXPECT_EQ(p.visibility[left_ear] + p.visibility[right_ear], 1.0);
  double hidden = 0;
  for (double v : p.visibility) hidden += 1.0 - v;
  EXPECT_GT(hidden, 0.0);
}

TEST(Projection, VisibilityDependsOnRotationOnly) {
  const Model3D& m = face24_model();
  const Projection a = project_points(m, make_pose(0.7, 0.2, 0.1, 600, {10, -4}));
  const Projection b = project_points(m, make_pose(0.7, 0.2, 0.1, 1500, {-30, 8}));
  EXPECT_EQ(a.visibility, b.visibility);
}

TEST(Projection, NonOrthonormalRotationRejected) {
  RigidPose p = make_pose(0, 0, 0, 800);
  p.rotation(0, 0) = 1.1;
  EXPECT_THROW(project_points(face24_model(), p), NumericError);
}

TEST(Score, UniformOutOfBoundsAndDeltas) {
  const ProbabilityMaps uniform_maps(3, 20, 20, 0.25f);
  const std::vector<Point2> inside{{1, 1}, {5, 7}, {19, 19}};
  EXPECT_DOUBLE_EQ(score_shape(uniform_maps, inside), 3 * 0.25);
  const std::vector<Point2> outside{{-3, 1}, {5, 20.6}, {1e12, 0}};
  EXPECT_EQ(score_shape(uniform_maps, outside), 0.0);
  ProbabilityMaps deltas(3, 20, 20);
  for (int l = 0; l < 3; ++l) deltas.cell(l, 2 * l + 3, 4 * l + 1) = 1.0f;
  const std::vector<Point2> at{{3, 1}, {5, 5}, {7, 9}};
  EXPECT_EQ(score_shape(deltas, at), 3.0);
}

TEST(FitPose, IdentityRecovered) {
  const RigidPose truth = make_pose(0, 0, 0, 900);
  const RigidPose got = fit_pose(correspondences(face24_model(), truth), truth.camera);
  EXPECT_LT(rotation_angle_between(got.rotation, truth.rotation), 1e-3);
  EXPECT_NEAR(got.translation.z(), 900, 0.9);
}

TEST(FitPose, RandomPosesRecovered) {
  Rng rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    const RigidPose truth =
        make_pose(uniform(rng, -60, 60) * kDeg, uniform(rng, -45, 45) * kDeg,
                  uniform(rng, -45, 45) * kDeg, uniform(rng, 500, 1500),
                  {uniform(rng, -20, 20), uniform(rng, -20, 20)});
    const RigidPose got = fit_pose(correspondences(face24_model(), truth), truth.camera);
    EXPECT_LT(rotation_angle_between(got.rotation, truth.rotation), 1e-3) << trial;
    EXPECT_NEAR(got.translation.z() / truth.translation.z(), 1.0, 1e-3);
  }
}

TEST(FitPose, ArityAndRank) {
  const auto c = correspondences(face24_model(), make_pose(0, 0, 0, 800));
  EXPECT_THROW(fit_pose(std::span(c).first(3), Camera{}), ArityError);
  std::vector<Correspondence> flat(c.begin(), c.begin() + 6);
  for (auto& x : flat) x.model.z() = 0;
  EXPECT_THROW(fit_pose(flat, Camera{}), RankError);
}

TEST(FitPose, InvariantToCommonImageAndFocalScaling) {
  const RigidPose truth = make_pose(0.4, -0.3, 0.2, 800, {5, -7});
  auto c = correspondences(face24_model(), truth);
  const RigidPose a = fit_pose(c, truth.camera);
  Camera scaled = truth.camera;
  scaled.focal *= 2.5;
  scaled.cx *= 2.5;
  scaled.cy *= 2.5;
  for (auto& x : c) x.image = 2.5 * x.image;
  const RigidPose b = fit_pose(c, scaled);
  EXPECT_LT(rotation_angle_between(a.rotation, b.rotation), 1e-6);
}

ProbabilityMaps maps_from(const Projection& proj, double outliers, uint64_t seed) {
  Shape gt(static_cast<int>(proj.coords.size()));
  gt.coords = proj.coords;
  SynthConfig cfg;
  cfg.coordinate_noise_sigma = 0;
  cfg.outlier_rate = outliers;
  return synthesize(gt, 160, 160, cfg, seed);
}

TEST(RobustInit, NoiselessMapsRecoverPose) {
  const RigidPose truth = make_pose(0.3, 0.1, -0.1, 800);
  const Projection proj = project_points(face24_model(), truth);
  const ProbabilityMaps maps = maps_from(proj, 0, 1);
  const InitResult r = robust_init(maps, face24_model(), truth.camera, {}, 5);
  double err = 0;
  for (int l = 0; l < 24; ++l) err += distance(r.shape.coords[l], proj.coords[l]) / 24;
  EXPECT_LT(err, 0.01 * 160);
  // The score is the sum of map values at the returned coordinates.
  EXPECT_EQ(r.score, score_shape(maps, r.shape.coords));
}

TEST(RobustInit, ScoreNonDecreasingInIterations) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const RigidPose truth = make_pose(0.5, 0.0, 0.2, 800);
    const ProbabilityMaps maps = maps_from(project_points(face24_model(), truth), 0.4, seed);
    double previous = -1;
    for (int z : {1, 2, 5, 10, 25}) {
      const InitResult r = robust_init(maps, face24_model(), truth.camera, {z, 6}, seed);
      EXPECT_GE(r.score, previous);
      previous = r.score;
    }
  }
}

TEST(RobustInit, BadArguments) {
  const ProbabilityMaps maps(24, 160, 160);
  EXPECT_THROW(robust_init(maps, face24_model(), Camera{}, {0, 6}, 1), std::invalid_argument);
  EXPECT_THROW(robust_init(maps, face24_model(), Camera{}, {5, 3}, 1), std::invalid_argument);
  EXPECT_THROW(robust_init(ProbabilityMaps(5, 160, 160), face24_model(), Camera{}, {}, 1),
               SchemaError);
}

TEST(MeanShape, OneSampleAndSymmetry) {
  Dataset d;
  Sample s;
  s.bbox = {10, 20, 100, 50};
  s.ground_truth = Shape(2);
  s.ground_truth.coords = {{60, 45}, {10, 70}};
  d.samples.push_back(s);
  Shape m = mean_shape_init(d);
  EXPECT_EQ(m.coords[0], (Point2{0.5, 0.5}));
  EXPECT_EQ(m.coords[1], (Point2{0.0, 1.0}));

  Sample mirror = s;
  mirror.ground_truth.coords = {{40, 45}, {110, 20}};
  d.samples.push_back(mirror);
  m = mean_shape_init(d);
  EXPECT_DOUBLE_EQ(m.coords[0].x, 0.4);
  EXPECT_DOUBLE_EQ(m.coords[1].x, 0.5);
  EXPECT_DOUBLE_EQ(m.coords[1].y, 0.5);
}

TEST(MeanShape, MatchesDirectAverage) {
  Rng rng(3);
  Dataset d;
  for (int i = 0; i < 10; ++i) {
    Sample s;
    s.bbox = {uniform(rng, 0, 50), uniform(rng, 0, 50), uniform(rng, 50, 150), uniform(rng, 50, 150)};
    s.ground_truth = Shape(4);
    for (int l = 0; l < 4; ++l) {
      s.ground_truth.coords[l] = {uniform(rng, 0, 200), uniform(rng, 0, 200)};
      if (uniform(rng, 0, 1) < 0.3 && i > 0) s.ground_truth.annotated[l] = 0;
    }
    d.samples.push_back(s);
  }
  d.samples[0].ground_truth.annotated.assign(4, 1);
  const Shape m = mean_shape_init(d);
  for (int l = 0; l < 4; ++l) {
    double sx = 0, sy = 0;
    int n = 0;
    for (const auto& s : d.samples) {
      if (!s.ground_truth.annotated[l]) continue;
      sx += (s.ground_truth.coords[l].x - s.bbox.x) / s.bbox.width;
      sy += (s.ground_truth.coords[l].y - s.bbox.y) / s.bbox.height;
      ++n;
    }
    EXPECT_NEAR(m.coords[l].x, sx / n, 1e-12);
    EXPECT_NEAR(m.coords[l].y, sy / n, 1e-12);
  }
}

TEST(MeanShape, NeverAnnotatedLandmarkIsAnError) {
  Dataset d;
  Sample s;
  s.bbox = {0, 0, 10, 10};
  s.ground_truth = Shape(3);
  s.ground_truth.annotated[1] = 0;
  d.samples.push_back(s);
  EXPECT_THROW(mean_shape_init(d), DataError);
}

TEST(Model3DFile, RoundTripAndShippedModel) {
  const Model3D& m = face24_model();
  EXPECT_EQ(m.size(), 24);
  EXPECT_EQ(m.distinct_ids.size(), 24u);
  std::istringstream in(format_model3d(m));
  const Model3D back = parse_model3d(in);
  ASSERT_EQ(back.size(), m.size());
  for (int l = 0; l < m.size(); ++l) {
    EXPECT_EQ(back.names[l], m.names[l]);
    EXPECT_LT((back.points[l] - m.points[l]).norm(), 1e-9);
    EXPECT_NEAR(back.normals[l].norm(), 1.0, 1e-12);
  }
  for (int l = 0; l < m.size(); ++l) EXPECT_EQ(m.names[l], testing::face24_schema()[l].name);
}

}  // namespace
}  // namespace ertalign
