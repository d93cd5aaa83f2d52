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

#include "ertalign/pose_init.h"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ertalign/error.h"
#include "ertalign/random.h"

namespace ertalign {

void RigidPose::validate() const {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw NumericError("pose contains non-finite values");
  }
  const double ortho = (rotation * rotation.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-6 || std::fabs(rotation.determinant() - 1.0) > 1e-6) {
    throw NumericError("rotation is not orthonormal within 1e-6");
  }
  if (!(translation.z() > 0.0)) throw NumericError("translation z must be positive");
  if (!(camera.focal > 0.0)) throw NumericError("focal must be positive");
}

Eigen::Matrix3d rotation_from_euler(double yaw, double pitch, double roll) {
  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  return (AngleAxisd(roll, Vector3d::UnitZ()) * AngleAxisd(pitch, Vector3d::UnitX()) *
          AngleAxisd(yaw, Vector3d::UnitY()))
      .toRotationMatrix();
}

double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

// ---------------------------------------------------------------------------
// Model file

void Model3D::validate() const {
  const auto n = points.size();
  if (n == 0) throw SchemaError("3D model has no points");
  if (normals.size() != n || names.size() != n) {
    throw SchemaError("3D model arrays disagree in length");
  }
  if (distinct_ids.size() < 4) throw SchemaError("3D model needs at least 4 distinct landmarks");
  for (int id : distinct_ids) {
    if (id < 0 || id >= size()) throw SchemaError("distinct id out of range");
  }
  Eigen::MatrixXd a(distinct_ids.size(), 3);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (int id : distinct_ids) mean += points[id];
  mean /= static_cast<double>(distinct_ids.size());
  for (std::size_t i = 0; i < distinct_ids.size(); ++i) {
    a.row(static_cast<Eigen::Index>(i)) = (points[distinct_ids[i]] - mean).transpose();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const auto sv = svd.singularValues();
  if (sv(2) <= 1e-6 * sv(0)) throw SchemaError("distinct model points are coplanar");
}

Model3D parse_model3d(std::istream& in) {
  Model3D m;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword)) continue;
    if (keyword != "point") throw ParseError("unknown directive '" + keyword + "'", line_number);
    std::string name;
    Eigen::Vector3d p, n;
    int distinct;
    if (!(ls >> name >> p.x() >> p.y() >> p.z() >> n.x() >> n.y() >> n.z() >> distinct) ||
        (distinct != 0 && distinct != 1)) {
      throw ParseError("malformed point directive", line_number);
    }
    if (n.norm() <= 0.0) throw ParseError("zero normal", line_number);
    if (distinct) m.distinct_ids.push_back(static_cast<int>(m.points.size()));
    m.names.push_back(std::move(name));
    m.points.push_back(p);
    m.normals.push_back(n.normalized());
  }
  m.validate();
  return m;
}

Model3D load_model3d(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open 3D model " + path.string());
  return parse_model3d(in);
}

std::string format_model3d(const Model3D& model) {
  std::ostringstream out;
  out.precision(17);
  out << "# point <name> X Y Z nx ny nz <distinct>\n";
  for (int i = 0; i < model.size(); ++i) {
    const bool distinct =
        std::find(model.distinct_ids.begin(), model.distinct_ids.end(), i) != model.distinct_ids.end();
    const auto& p = model.points[i];
    const auto& n = model.normals[i];
    out << "point " << model.names[i] << ' ' << p.x() << ' ' << p.y() << ' ' << p.z() << ' '
        << n.x() << ' ' << n.y() << ' ' << n.z() << ' ' << (distinct ? 1 : 0) << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------

Projection project_points(std::span<const Eigen::Vector3d> points,
                          std::span<const Eigen::Vector3d> normals, const RigidPose& pose) {
  pose.validate();
  const double s = pose.scale();
  Projection out;
  out.coords.resize(points.size());
  out.visibility.resize(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Eigen::Vector3d p = pose.rotation * points[i] + pose.translation;
    out.coords[i] = {pose.camera.cx + s * p.x(), pose.camera.cy + s * p.y()};
    const double facing = -(pose.rotation * normals[i]).z();
    out.visibility[i] = facing >= 0.0 ? 1.0 : 0.0;
  }
  return out;
}

Projection project_points(const Model3D& model, const RigidPose& pose) {
  return project_points(model.points, model.normals, pose);
}

double score_shape(const MapSource& maps, std::span<const Point2> coords) {
  double total = 0.0;
  for (std::size_t l = 0; l < coords.size(); ++l) {
    const Pixel p = round_px(coords[l]);
    total += maps.at(static_cast<int>(l), p.x, p.y);
  }
  return total;
}

RigidPose fit_pose(std::span<const Correspondence> correspondences, const Camera& camera,
                   const PoseFitOptions& options) {
  const auto n = static_cast<Eigen::Index>(correspondences.size());
  if (n < 4) throw ArityError("fit_pose needs at least 4 correspondences, got " + std::to_string(n));

  Eigen::MatrixXd model(n, 3);
  Eigen::MatrixXd image(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& c = correspondences[i];
    model.row(i) = c.model.transpose();
    image.row(i) << c.image.x - camera.cx, c.image.y - camera.cy;
  }
  const Eigen::RowVector3d model_mean = model.colwise().mean();
  const Eigen::RowVector2d image_mean = image.colwise().mean();
  const Eigen::MatrixXd a = model.rowwise() - model_mean;
  const Eigen::MatrixXd b = image.rowwise() - image_mean;
  if (!a.allFinite() || !b.allFinite()) throw NumericError("non-finite correspondence");

  Eigen::JacobiSVD<Eigen::MatrixXd> model_svd(a);
  const auto sv = model_svd.singularValues();
  if (!(sv(0) > 0.0) || sv(2) <= 1e-6 * sv(0)) {
    throw RankError("model points are coplanar or collinear");
  }

  // Affine orthographic estimate: b ~= a * M^T.
  const Eigen::Matrix<double, 3, 2> mt = a.colPivHouseholderQr().solve(b);
  Eigen::JacobiSVD<Eigen::MatrixXd> affine_svd(Eigen::MatrixXd(mt.transpose()),
                                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  const double s0 = 0.5 * (affine_svd.singularValues()(0) + affine_svd.singularValues()(1));
  if (!(s0 > 1e-12) || !std::isfinite(s0)) throw RankError("image points are degenerate");
  const Eigen::Matrix<double, 2, 3> rows = affine_svd.matrixU() * affine_svd.matrixV().transpose();

  Eigen::Matrix3d rotation;
  rotation.row(0) = rows.row(0);
  rotation.row(1) = rows.row(1);
  rotation.row(2) = rows.row(0).cross(rows.row(1));
  double scale = s0;

  const Eigen::Matrix3Xd src = a.transpose();
  Eigen::Matrix3Xd dst(3, n);
  dst.topRows(2) = b.transpose();
  for (int it = 0; it < options.max_iterations; ++it) {
    dst.row(2) = scale * (rotation.row(2) * src);
    const Eigen::Matrix4d t = Eigen::umeyama(src, dst, true);
    const Eigen::Matrix3d sr = t.topLeftCorner<3, 3>();
    const double next_scale = std::cbrt(sr.determinant());
    if (!std::isfinite(next_scale) || !(next_scale > 0.0)) {
      throw NumericError("pose iteration diverged");
    }
    const Eigen::Matrix3d next_rotation = sr / next_scale;
    if (!next_rotation.allFinite()) throw NumericError("pose iteration diverged");
    const double change = std::max((next_rotation - rotation).cwiseAbs().maxCoeff(),
                                   std::fabs(next_scale - scale) / scale);
    rotation = next_rotation;
    scale = next_scale;
    if (change < options.tolerance) break;
  }

  // Re-orthonormalise to wash out accumulated rounding.
  Eigen::JacobiSVD<Eigen::Matrix3d> r_svd(rotation, Eigen::ComputeFullU | Eigen::ComputeFullV);
  rotation = r_svd.matrixU() * r_svd.matrixV().transpose();
  if (rotation.determinant() < 0.0) throw NumericError("pose iteration produced a reflection");

  RigidPose pose;
  pose.camera = camera;
  pose.rotation = rotation;
  const Eigen::Vector2d txy =
      image_mean.transpose() / scale - (rotation.topRows(2) * model_mean.transpose());
  pose.translation = {txy.x(), txy.y(), camera.focal / scale};
  if (!pose.translation.allFinite()) throw NumericError("pose translation is not finite");
  return pose;
}

InitResult robust_init(const MapSource& maps, const Model3D& model, const Camera& camera,
                       const RobustInitConfig& config, uint64_t seed) {
  if (config.iterations < 1) throw std::invalid_argument("robust_init needs Z >= 1");
  if (config.subset_size < 4) throw std::invalid_argument("subset size must be at least 4");
  if (config.subset_size > static_cast<int>(model.distinct_ids.size())) {
    throw std::invalid_argument("subset size exceeds the number of distinct landmarks");
  }
  if (maps.landmarks() != model.size()) {
    throw SchemaError("maps and 3D model disagree on the landmark count");
  }
  const auto peaks = peak_coords(maps);

  InitResult best;
  best.score = -std::numeric_limits<double>::infinity();
  std::vector<int> pool(model.distinct_ids);
  std::vector<Correspondence> subset(config.subset_size);
  for (int z = 0; z < config.iterations; ++z) {
    Rng rng(mix_seed(seed, {static_cast<uint64_t>(z)}));
    std::copy(model.distinct_ids.begin(), model.distinct_ids.end(), pool.begin());
    for (int k = 0; k < config.subset_size; ++k) {
      std::uniform_int_distribution<int> pick(k, static_cast<int>(pool.size()) - 1);
      std::swap(pool[k], pool[pick(rng)]);
      const int id = pool[k];
      subset[k] = {{static_cast<double>(peaks[id].x), static_cast<double>(peaks[id].y)},
                   model.points[id]};
    }
    RigidPose pose;
    try {
      pose = fit_pose(subset, camera);
    } catch (const NumericError&) {
      continue;
    }
    auto projection = project_points(model, pose);
    const double score = score_shape(maps, projection.coords);
    ++best.successful_hypotheses;
    if (score > best.score) {
      best.score = score;
      best.pose = pose;
      best.shape = Shape(model.size());
      best.shape.coords = std::move(projection.coords);
      best.shape.visibility = std::move(projection.visibility);
    }
  }
  if (best.successful_hypotheses == 0) {
    throw InitError("every pose hypothesis failed to fit");
  }
  return best;
}

Shape mean_shape_init(const Dataset& train) {
  if (train.empty()) throw DataError("mean shape needs a non-empty training set");
  const int n = train.samples.front().landmark_count();
  std::vector<double> sx(n, 0.0), sy(n, 0.0);
  std::vector<int> count(n, 0);
  for (const auto& s : train.samples) {
    const auto& gt = s.ground_truth;
    if (gt.size() != n) throw SchemaError("samples disagree on landmark count");
    for (int l = 0; l < n; ++l) {
      if (!gt.annotated[l]) continue;
      sx[l] += (gt.coords[l].x - s.bbox.x) / s.bbox.width;
      sy[l] += (gt.coords[l].y - s.bbox.y) / s.bbox.height;
      ++count[l];
    }
  }
  Shape mean(n);
  for (int l = 0; l < n; ++l) {
    if (count[l] == 0) {
      throw DataError("landmark " + std::to_string(l) + " is annotated in no training sample");
    }
    mean.coords[l] = {sx[l] / count[l], sy[l] / count[l]};
  }
  return mean;
}

Shape anchor_shape(const Shape& normalized, const CropFrame& frame) {
  Shape out = normalized;
  for (auto& p : out.coords) p = {p.x * frame.width, p.y * frame.height};
  return out;
}

}  // namespace ertalign
