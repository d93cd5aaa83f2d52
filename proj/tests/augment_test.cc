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

#include "ertalign/augment.h"
#include "ertalign/error.h"
#include "ertalign/random.h"
#include "test_util.h"

namespace ertalign {
namespace {

using testing::face24_model;
using testing::face24_schema;

std::vector<Shape> random_sources(int n, uint64_t seed, double missing = 0.0) {
  Rng rng(seed);
  std::vector<Shape> out;
  for (int i = 0; i < n; ++i) {
    Shape s(24);
    for (int l = 0; l < 24; ++l) {
      s.coords[l] = {uniform(rng, 30, 130), uniform(rng, 30, 130)};
      if (uniform(rng, 0, 1) < missing) {
        s.annotated[l] = 0;
        s.coords[l] = {0, 0};
      }
    }
    out.push_back(s);
  }
  return out;
}

std::vector<InitEstimate> mean_inits(const std::vector<Shape>& sources) {
  std::vector<InitEstimate> out;
  for (const auto& s : sources) {
    Shape init = s;
    for (auto& c : init.coords) c = c + Point2{3, -2};
    out.push_back({init, std::nullopt});
  }
  return out;
}

TEST(Augment, ZeroNoiseTargetCountNCopiesOriginals) {
  const auto sources = random_sources(6, 1, 0.2);
  const auto inits = mean_inits(sources);
  const auto out = augment(sources, inits, 6, AugmentConfig::none(), face24_schema(), nullptr,
                           160, 160, 42);
  ASSERT_EQ(out.size(), 6u);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(out[i].source, i);
    EXPECT_TRUE(out[i].warp.is_identity());
    EXPECT_TRUE(out[i].occlusions.empty());
    EXPECT_EQ(out[i].target, sources[i]);
    EXPECT_EQ(out[i].initial.coords, inits[i].initial.coords);
  }
}

TEST(Augment, DefaultBounds) {
  const AugmentConfig c;
  EXPECT_EQ(c.rotation_deg, 45.0);
  EXPECT_EQ(c.scale, 0.15);
  EXPECT_EQ(c.translation, 0.05);
}

TEST(Augment, SampledTransformsStayWithinBounds) {
  const auto sources = random_sources(5, 2);
  const AugmentConfig c;
  const auto out =
      augment(sources, mean_inits(sources), 2000, c, face24_schema(), nullptr, 160, 160, 7);
  double max_angle = 0, max_scale = 0, max_shift = 0;
  int mirrored = 0;
  for (const auto& a : out) {
    max_angle = std::max(max_angle, std::fabs(a.warp.angle) * 180.0 / std::numbers::pi);
    max_scale = std::max(max_scale, std::fabs(a.warp.scale - 1.0));
    max_shift = std::max({max_shift, std::fabs(a.warp.shift.x), std::fabs(a.warp.shift.y)});
    mirrored += a.warp.mirror ? 1 : 0;
  }
  EXPECT_LE(max_angle, 45.0);
  EXPECT_GT(max_angle, 40.0);
  EXPECT_LE(max_scale, 0.15);
  EXPECT_GT(max_scale, 0.13);
  EXPECT_LE(max_shift, 0.05 * 160);
  EXPECT_NEAR(mirrored / 2000.0, 0.5, 0.05);
}

TEST(Augment, LargeTargetCountProducesExactly) {
  const auto sources = random_sources(3, 3);
  const auto out = augment(sources, mean_inits(sources), 60000, AugmentConfig{}, face24_schema(),
                           nullptr, 160, 160, 1);
  EXPECT_GE(out.size(), 60000u);
}

TEST(Augment, TargetBelowDatasetSizeRejected) {
  const auto sources = random_sources(4, 3);
  EXPECT_THROW(augment(sources, mean_inits(sources), 3, AugmentConfig{}, face24_schema(), nullptr,
                       160, 160, 1),
               std::invalid_argument);
  EXPECT_THROW(augment({}, {}, 3, AugmentConfig{}, face24_schema(), nullptr, 160, 160, 1),
               DataError);
}

TEST(Augment, SourcesAreNeverModified) {
  const auto sources = random_sources(4, 5, 0.1);
  const auto copy = sources;
  augment(sources, mean_inits(sources), 50, AugmentConfig{}, face24_schema(), nullptr, 160, 160,
          3);
  EXPECT_EQ(sources, copy);
}

TEST(Augment, MaskFollowsTheLandmarkMap) {
  const auto sources = random_sources(4, 6, 0.3);
  const auto out = augment(sources, mean_inits(sources), 200, AugmentConfig{}, face24_schema(),
                           nullptr, 160, 160, 9);
  for (const auto& a : out) {
    for (int l = 0; l < 24; ++l) {
      EXPECT_EQ(a.target.annotated[l], sources[a.source].annotated[a.landmark_map[l]]);
    }
  }
}

TEST(Augment, OccludedTargetsLoseVisibility) {
  const auto sources = random_sources(4, 7);
  AugmentConfig c;
  c.occlusion_rate = 1.0;
  const auto out =
      augment(sources, mean_inits(sources), 100, c, face24_schema(), nullptr, 160, 160, 2);
  int covered = 0;
  for (const auto& a : out) {
    ASSERT_EQ(a.occlusions.size(), 1u);
    for (int l = 0; l < 24; ++l) {
      const bool inside = a.occlusions[0].contains(a.target.coords[l]);
      EXPECT_EQ(a.target.visibility[l], inside ? 0.0 : sources[a.source].visibility[l]);
      covered += inside ? 1 : 0;
    }
  }
  EXPECT_GT(covered, 0);
}

TEST(Augment, MirrorTwiceIsIdentity) {
  const auto sources = random_sources(3, 8);
  const auto mirror = face24_schema().mirror_map();
  Warp w;
  w.mirror = true;
  w.center = {80, 80};
  for (const auto& s : sources) {
    const Shape twice = warp_shape(warp_shape(s, w, mirror), w, mirror);
    for (int l = 0; l < 24; ++l) {
      EXPECT_NEAR(twice.coords[l].x, s.coords[l].x, 1e-9);
      EXPECT_NEAR(twice.coords[l].y, s.coords[l].y, 1e-9);
    }
  }
}

TEST(Augment, MirroredFaceSwapsSides) {
  // A frontal projection mirrored about the crop centre maps each landmark
  // onto its counterpart.
  RigidPose pose;
  pose.camera = Camera::for_crop(160, 160);
  pose.translation = {0, 0, 800};
  Shape s(24);
  s.coords = project_points(face24_model(), pose).coords;
  Warp w;
  w.mirror = true;
  w.center = {80, 80};
  const Shape m = warp_shape(s, w, face24_schema().mirror_map());
  for (int l = 0; l < 24; ++l) {
    EXPECT_NEAR(m.coords[l].x, s.coords[l].x, 1e-9);
    EXPECT_NEAR(m.coords[l].y, s.coords[l].y, 1e-9);
  }
}

TEST(Augment, DependsOnlyOnSeedAndIndex) {
  const auto sources = random_sources(5, 9);
  const auto a = augment(sources, mean_inits(sources), 40, AugmentConfig{}, face24_schema(),
                         nullptr, 160, 160, 11);
  const auto b = augment(sources, mean_inits(sources), 80, AugmentConfig{}, face24_schema(),
                         nullptr, 160, 160, 11);
  for (int i = 0; i < 40; ++i) {
    EXPECT_EQ(a[i].target, b[i].target);
    EXPECT_EQ(a[i].initial, b[i].initial);
    EXPECT_EQ(a[i].warp.angle, b[i].warp.angle);
  }
}

TEST(Augment, PoseInitialsAreReprojectedPerturbations) {
  RigidPose pose;
  pose.camera = Camera::for_crop(160, 160);
  pose.translation = {0, 0, 800};
  pose.rotation = rotation_from_euler(0.2, 0.1, 0.0);
  Shape src(24);
  src.coords = project_points(face24_model(), pose).coords;
  const std::vector<Shape> sources{src};
  const std::vector<InitEstimate> inits{{src, pose}};
  AugmentConfig c = AugmentConfig::none();
  const auto same = augment(sources, inits, 3, c, face24_schema(), &face24_model(), 160, 160, 4);
  for (const auto& a : same) {
    for (int l = 0; l < 24; ++l) {
      EXPECT_NEAR(a.initial.coords[l].x, src.coords[l].x, 1e-9);
      EXPECT_NEAR(a.initial.coords[l].y, src.coords[l].y, 1e-9);
    }
  }
  c.yaw_noise_deg = 10;
  const auto noisy = augment(sources, inits, 3, c, face24_schema(), &face24_model(), 160, 160, 4);
  double moved = 0;
  for (int l = 0; l < 24; ++l) moved += distance(noisy[1].initial.coords[l], src.coords[l]);
  EXPECT_GT(moved, 0.0);
  EXPECT_THROW(augment(sources, inits, 3, c, face24_schema(), nullptr, 160, 160, 4),
               std::invalid_argument);
}

}  // namespace
}  // namespace ertalign
