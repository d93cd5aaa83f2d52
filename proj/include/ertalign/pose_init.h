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

// Rigid 3D face-model fitting to map peaks: weak-perspective projection, an
// iterative scaled-orthographic pose solver and the RANSAC-style consensus
// loop that scores each hypothesis by the map values it lands on.
//
// Frames: camera x right, y down, z away from the camera. Model points are
// in model units (mm for the shipped files); the face looks towards -z.

#ifndef ERTALIGN_POSE_INIT_H_
#define ERTALIGN_POSE_INIT_H_

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ertalign/geometry.h"
#include "ertalign/heatmap.h"
#include "ertalign/shape_data.h"

namespace ertalign {

struct Camera {
  double focal = 700.0;  // pixels per model unit at unit depth
  double cx = 80.0;
  double cy = 80.0;

  static Camera for_crop(int width, int height, double focal = 700.0) {
    return {focal, width / 2.0, height / 2.0};
  }
};

// Projection: u = c + (focal / t_z) * (R X + t)_xy.
struct RigidPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation{0.0, 0.0, 1000.0};
  Camera camera;

  double scale() const { return camera.focal / translation.z(); }
  // Throws NumericError unless R is a rotation within 1e-6 and t_z > 0.
  void validate() const;
};

// R = Rz(roll) * Rx(pitch) * Ry(yaw), angles in radians.
Eigen::Matrix3d rotation_from_euler(double yaw, double pitch, double roll);
// Angle of the relative rotation Ra^T Rb, in radians.
double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

struct Model3D {
  std::vector<std::string> names;
  std::vector<Eigen::Vector3d> points;
  std::vector<Eigen::Vector3d> normals;  // outward, unit length
  std::vector<int> distinct_ids;

  int size() const { return static_cast<int>(points.size()); }
  void validate() const;
};

// Text format: "point <name> X Y Z nx ny nz <distinct 0|1>" per line.
Model3D parse_model3d(std::istream& in);
Model3D load_model3d(const std::filesystem::path& path);
std::string format_model3d(const Model3D& model);

struct Projection {
  std::vector<Point2> coords;
  std::vector<double> visibility;
};

// Visibility is 1 when the rotated outward normal faces the camera
// (non-positive z component), 0 otherwise.
Projection project_points(const Model3D& model, const RigidPose& pose);
// Same, for an explicit (e.g. deformed) point set sharing the model normals.
Projection project_points(std::span<const Eigen::Vector3d> points,
                          std::span<const Eigen::Vector3d> normals, const RigidPose& pose);

// Sum over landmarks of the map value at the rounded coordinate.
double score_shape(const MapSource& maps, std::span<const Point2> coords);

struct Correspondence {
  Point2 image;
  Eigen::Vector3d model;
};

struct PoseFitOptions {
  int max_iterations = 100;
  double tolerance = 1e-6;
};

// Weak-perspective pose from >= 4 known 2D-3D correspondences. Starts from
// the affine (orthographic) least-squares estimate and alternates between
// re-estimating per-point depths from the current pose and solving the full
// 3D similarity Procrustes problem.
RigidPose fit_pose(std::span<const Correspondence> correspondences, const Camera& camera,
                   const PoseFitOptions& options = {});

struct InitResult {
  Shape shape;  // crop frame; annotated all 1
  RigidPose pose;
  double score = 0.0;
  int successful_hypotheses = 0;
};

struct RobustInitConfig {
  int iterations = 25;  // Z
  int subset_size = 6;
};

InitResult robust_init(const MapSource& maps, const Model3D& model, const Camera& camera,
                       const RobustInitConfig& config, uint64_t seed);

// Per-landmark mean of the annotated ground truth in bbox-normalised
// coordinates ([0,1] across the box). Visibility is all 1.
Shape mean_shape_init(const Dataset& train);
// Places a bbox-normalised shape into the given frame's crop coordinates.
Shape anchor_shape(const Shape& normalized, const CropFrame& frame);

}  // namespace ertalign

#endif  // ERTALIGN_POSE_INIT_H_
