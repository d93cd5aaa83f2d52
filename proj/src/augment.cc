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

#include "ertalign/augment.h"

#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "ertalign/error.h"
#include "ertalign/random.h"

namespace ertalign {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Symmetric draw in [-bound, bound]. Always consumes one variate so that the
// stream layout does not depend on which bounds are zero.
double symmetric(Rng& rng, double bound) {
  const double u = uniform(rng, -1.0, 1.0);
  return bound > 0.0 ? bound * u : 0.0;
}

Shape rotate_about_centroid(const Shape& shape, double angle) {
  if (angle == 0.0) return shape;
  Point2 c;
  for (const auto& p : shape.coords) c = c + p;
  c = (1.0 / std::max(1, shape.size())) * c;
  const double cs = std::cos(angle), sn = std::sin(angle);
  Shape out = shape;
  for (auto& p : out.coords) {
    const double dx = p.x - c.x, dy = p.y - c.y;
    p = {c.x + cs * dx - sn * dy, c.y + sn * dx + cs * dy};
  }
  return out;
}

}  // namespace

void AugmentConfig::validate() const {
  auto non_negative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("augmentation bound ") + name + " must be >= 0");
    }
  };
  non_negative(rotation_deg, "rotation");
  non_negative(scale, "scale");
  non_negative(translation, "translation");
  non_negative(occlusion_max, "occlusion size");
  non_negative(yaw_noise_deg, "yaw noise");
  non_negative(pitch_noise_deg, "pitch noise");
  non_negative(roll_noise_deg, "roll noise");
  if (scale >= 1.0) throw std::invalid_argument("scale bound must be below 1");
  if (!(occlusion_rate >= 0.0 && occlusion_rate <= 1.0)) {
    throw std::invalid_argument("occlusion rate must lie in [0,1]");
  }
}

AugmentConfig AugmentConfig::none() {
  AugmentConfig c;
  c.rotation_deg = c.scale = c.translation = 0.0;
  c.mirror = false;
  c.occlusion_rate = 0.0;
  c.yaw_noise_deg = c.pitch_noise_deg = c.roll_noise_deg = 0.0;
  return c;
}

Shape warp_shape(const Shape& shape, const Warp& warp, std::span<const int> landmark_map) {
  Shape out(shape.size());
  for (int l = 0; l < shape.size(); ++l) {
    const int src = landmark_map[l];
    out.coords[l] = warp.is_identity() ? shape.coords[src] : warp.apply(shape.coords[src]);
    out.visibility[l] = shape.visibility[src];
    out.annotated[l] = shape.annotated[src];
  }
  return out;
}

std::vector<AugmentedSample> augment(std::span<const Shape> sources,
                                     std::span<const InitEstimate> inits, int target_count,
                                     const AugmentConfig& config, const LandmarkSchema& schema,
                                     const Model3D* model, int crop_width, int crop_height,
                                     uint64_t seed) {
  config.validate();
  const int n = static_cast<int>(sources.size());
  if (n == 0) throw DataError("cannot augment an empty dataset");
  if (inits.size() != sources.size()) {
    throw std::invalid_argument("one initial estimate per source is required");
  }
  if (target_count < n) {
    throw std::invalid_argument("augmentation target " + std::to_string(target_count) +
                                " is below the dataset size " + std::to_string(n));
  }
  const int landmarks = schema.size();
  for (const auto& s : sources) {
    if (s.size() != landmarks) throw SchemaError("source shape disagrees with the schema");
  }
  std::vector<int> identity(landmarks);
  std::iota(identity.begin(), identity.end(), 0);
  const std::vector<int> mirrored = schema.mirror_map();
  const Point2 center{crop_width / 2.0, crop_height / 2.0};

  std::vector<AugmentedSample> out(target_count);
  for (int i = 0; i < target_count; ++i) {
    Rng rng(mix_seed(seed, {static_cast<uint64_t>(i)}));
    AugmentedSample& a = out[i];
    a.source = i % n;

    a.warp.center = center;
    a.warp.angle = symmetric(rng, config.rotation_deg) * kDegToRad;
    a.warp.scale = 1.0 + symmetric(rng, config.scale);
    a.warp.shift = {symmetric(rng, config.translation) * crop_width,
                    symmetric(rng, config.translation) * crop_height};
    a.warp.mirror = uniform(rng, 0.0, 1.0) < 0.5 && config.mirror;
    a.landmark_map = a.warp.mirror ? mirrored : identity;

    const double u_occ = uniform(rng, 0.0, 1.0);
    const double w = uniform(rng, 0.25, 1.0) * config.occlusion_max * crop_width;
    const double h = uniform(rng, 0.25, 1.0) * config.occlusion_max * crop_height;
    const double ox = uniform(rng, 0.0, 1.0) * (crop_width - w);
    const double oy = uniform(rng, 0.0, 1.0) * (crop_height - h);
    if (u_occ < config.occlusion_rate && w > 0.0 && h > 0.0) a.occlusions.push_back({ox, oy, w, h});

    const double yaw = symmetric(rng, config.yaw_noise_deg) * kDegToRad;
    const double pitch = symmetric(rng, config.pitch_noise_deg) * kDegToRad;
    const double roll = symmetric(rng, config.roll_noise_deg) * kDegToRad;

    a.target = warp_shape(sources[a.source], a.warp, a.landmark_map);
    for (int l = 0; l < landmarks; ++l) {
      for (const auto& r : a.occlusions) {
        if (r.contains(a.target.coords[l])) a.target.visibility[l] = 0.0;
      }
    }

    const InitEstimate& init = inits[a.source];
    if (init.pose) {
      if (model == nullptr) throw std::invalid_argument("pose-based augmentation needs a 3D model");
      RigidPose perturbed = *init.pose;
      perturbed.rotation = rotation_from_euler(yaw, pitch, roll) * perturbed.rotation;
      const Projection proj = project_points(*model, perturbed);
      Shape projected(landmarks);
      projected.coords = proj.coords;
      projected.visibility = proj.visibility;
      a.initial = warp_shape(projected, a.warp, a.landmark_map);
    } else {
      // A mean-shape start ignores the face content, so it is not warped.
      a.initial = rotate_about_centroid(init.initial, roll);
    }
    a.initial.annotated.assign(landmarks, 1);
  }
  return out;
}

}  // namespace ertalign
