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

// Training-set augmentation. Augmented faces never copy pixels: each one is a
// source index plus the image-space transform (similarity, mirror,
// occlusion rectangles) that downstream code applies to map lookups and
// coordinates, together with its crop-frame target and initial shape.

#ifndef ERTALIGN_AUGMENT_H_
#define ERTALIGN_AUGMENT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ertalign/geometry.h"
#include "ertalign/pose_init.h"
#include "ertalign/shape_data.h"

namespace ertalign {

struct AugmentConfig {
  double rotation_deg = 45.0;  // in-plane rotation bound
  double scale = 0.15;         // relative scale bound
  double translation = 0.05;   // fraction of the crop side
  bool mirror = true;          // mirror with probability 1/2
  double occlusion_rate = 0.25;
  double occlusion_max = 0.4;  // largest rectangle side, fraction of the crop side
  // Pose perturbation bounds for initial shapes re-projected from an
  // estimated pose, and the in-plane bound used for mean-shape starts.
  double yaw_noise_deg = 10.0;
  double pitch_noise_deg = 10.0;
  double roll_noise_deg = 10.0;

  void validate() const;
  static AugmentConfig none();
};

// Starting point of one source face in crop coordinates. With a pose the
// initial shape of every copy is the re-projection of a perturbed pose;
// without one it is `initial` rotated about its centroid.
struct InitEstimate {
  Shape initial;
  std::optional<RigidPose> pose;
};

struct AugmentedSample {
  int source = 0;
  Warp warp;
  std::vector<int> landmark_map;  // output landmark l reads source landmark landmark_map[l]
  std::vector<Rect> occlusions;   // crop coordinates, after the warp
  Shape target;                   // crop-frame ground truth of the warped face
  Shape initial;
};

// Coordinates of `shape` seen through the warp; landmark l of the result is
// landmark landmark_map[l] of the input.
Shape warp_shape(const Shape& shape, const Warp& warp, std::span<const int> landmark_map);

// Exactly max(target_count, N) samples; sample i derives from source i mod N
// and depends only on (seed, i). `sources` are in crop coordinates.
// The first N samples are identity transforms when every bound is zero.
std::vector<AugmentedSample> augment(std::span<const Shape> sources,
                                     std::span<const InitEstimate> inits, int target_count,
                                     const AugmentConfig& config, const LandmarkSchema& schema,
                                     const Model3D* model, int crop_width, int crop_height,
                                     uint64_t seed);

}  // namespace ertalign

#endif  // ERTALIGN_AUGMENT_H_
