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

#include "ertalign/synth.h"

#include <zlib.h>

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "ertalign/error.h"
#include "ertalign/random.h"

namespace ertalign {

Coupling parse_coupling(const std::string& name) {
  if (name == "independent") return Coupling::kIndependent;
  if (name == "correlated") return Coupling::kCorrelated;
  if (name == "anticorrelated") return Coupling::kAnticorrelated;
  throw UsageError("unknown coupling '" + name + "'");
}

std::string to_string(Coupling c) {
  switch (c) {
    case Coupling::kCorrelated: return "correlated";
    case Coupling::kAnticorrelated: return "anticorrelated";
    case Coupling::kIndependent: break;
  }
  return "independent";
}

namespace {

constexpr int kJawOpen = 0;
constexpr int kBrowRaise = 2;

}  // namespace

const std::vector<DeformationMode>& deformation_modes() {
  using V = Eigen::Vector3d;
  static const std::vector<DeformationMode> modes = {
      {"jaw_open",
       {{"mouth_lower", V(0, 1.0, 0)},
        {"chin", V(0, 1.3, 0)},
        {"mouth_left", V(0, 0.3, 0)},
        {"mouth_right", V(0, 0.3, 0)}}},
      {"smile",
       {{"mouth_left", V(-0.8, -0.5, 0)},
        {"mouth_right", V(0.8, -0.5, 0)},
        {"mouth_upper", V(0, -0.2, 0)}}},
      {"brow_raise",
       {{"left_brow_outer", V(0, -1.0, 0)},
        {"left_brow_center", V(0, -1.0, 0)},
        {"left_brow_inner", V(0, -1.0, 0)},
        {"right_brow_inner", V(0, -1.0, 0)},
        {"right_brow_center", V(0, -1.0, 0)},
        {"right_brow_outer", V(0, -1.0, 0)}}},
      {"brow_asym",
       {{"left_brow_outer", V(0, -0.8, 0)},
        {"left_brow_center", V(0, -0.8, 0)},
        {"left_brow_inner", V(0, -0.8, 0)},
        {"right_brow_inner", V(0, 0.8, 0)},
        {"right_brow_center", V(0, 0.8, 0)},
        {"right_brow_outer", V(0, 0.8, 0)}}},
      {"nose_wide", {{"nose_left", V(-0.6, 0, 0)}, {"nose_right", V(0.6, 0, 0)}}},
      {"face_wide",
       {{"left_ear_top", V(-1.0, 0, 0)},
        {"left_ear_lobe", V(-1.0, 0, 0)},
        {"right_ear_top", V(1.0, 0, 0)},
        {"right_ear_lobe", V(1.0, 0, 0)}}},
  };
  return modes;
}

void SynthCorpusConfig::validate() const {
  if (count < 1) throw std::invalid_argument("corpus count must be positive");
  if (crop < 8) throw std::invalid_argument("crop size is too small");
  if (!(focal > 0.0) || !(depth > 0.0)) throw std::invalid_argument("focal and depth must be > 0");
  if (!(deformation >= 0.0)) throw std::invalid_argument("deformation must be >= 0");
  if (!(missing_rate >= 0.0 && missing_rate <= 1.0)) {
    throw std::invalid_argument("missing rate must lie in [0,1]");
  }
  if (!mode_means.empty() && mode_means.size() != deformation_modes().size()) {
    throw std::invalid_argument("mode_means needs one entry per deformation mode");
  }
  maps.validate();
}

Dataset make_corpus(const Model3D& model, const LandmarkSchema& schema,
                    const SynthCorpusConfig& config, std::vector<SynthFace>* faces) {
  config.validate();
  if (model.size() != schema.size()) {
    throw SchemaError("3D model and schema disagree on the landmark count");
  }
  const int landmarks = schema.size();
  const auto& modes = deformation_modes();
  // Per-mode displacement fields resolved against this schema.
  std::vector<std::vector<Eigen::Vector3d>> fields(modes.size(),
                                                   std::vector<Eigen::Vector3d>(landmarks));
  for (std::size_t m = 0; m < modes.size(); ++m) {
    for (auto& f : fields[m]) f.setZero();
    for (const auto& [name, d] : modes[m].displacements) {
      if (auto l = schema.index_of(name)) fields[m][*l] = d;
    }
  }
  std::vector<uint8_t> never(landmarks, 0);
  for (const auto& name : config.never_annotated) {
    const auto l = schema.index_of(name);
    if (!l) throw SchemaError("never_annotated names unknown landmark " + name);
    never[*l] = 1;
  }

  constexpr double kDeg = std::numbers::pi / 180.0;
  const Camera camera = Camera::for_crop(config.crop, config.crop, config.focal);
  Dataset out;
  out.schema = schema;
  out.samples.reserve(config.count);
  if (faces) faces->clear();
  for (int i = 0; i < config.count; ++i) {
    Rng rng(mix_seed(config.seed, {0xc0de, static_cast<uint64_t>(i)}));
    SynthFace face;
    const double yaw = uniform(rng, -1.0, 1.0) * config.yaw_deg * kDeg;
    const double pitch = uniform(rng, -1.0, 1.0) * config.pitch_deg * kDeg;
    const double roll = uniform(rng, -1.0, 1.0) * config.roll_deg * kDeg;
    const double sx = uniform(rng, -1.0, 1.0) * config.shift_px;
    const double sy = uniform(rng, -1.0, 1.0) * config.shift_px;
    face.pose.camera = camera;
    face.pose.rotation = rotation_from_euler(yaw, pitch, roll);
    face.pose.translation = {sx * config.depth / config.focal, sy * config.depth / config.focal,
                             config.depth};

    face.coefficients.resize(modes.size());
    for (std::size_t m = 0; m < modes.size(); ++m) {
      const double mean = config.mode_means.empty() ? 0.0 : config.mode_means[m];
      face.coefficients[m] = (mean + gaussian(rng, 1.0)) * config.deformation;
    }
    if (config.coupling == Coupling::kCorrelated) {
      face.coefficients[kBrowRaise] = face.coefficients[kJawOpen];
    } else if (config.coupling == Coupling::kAnticorrelated) {
      face.coefficients[kBrowRaise] = -face.coefficients[kJawOpen];
    }

    std::vector<Eigen::Vector3d> points = model.points;
    for (std::size_t m = 0; m < modes.size(); ++m) {
      if (face.coefficients[m] == 0.0) continue;
      for (int l = 0; l < landmarks; ++l) points[l] += face.coefficients[m] * fields[m][l];
    }
    const Projection proj = project_points(points, model.normals, face.pose);
    face.rigid = project_points(model, face.pose).coords;

    Sample s;
    char ref[32];
    std::snprintf(ref, sizeof ref, "synth/%06d", i);
    s.image_ref = ref;
    s.bbox = {std::floor(uniform(rng, 0.0, 240.0)), std::floor(uniform(rng, 0.0, 120.0)),
              static_cast<double>(config.crop), static_cast<double>(config.crop)};
    s.ground_truth = Shape(landmarks);
    for (int l = 0; l < landmarks; ++l) {
      const bool missing = uniform(rng, 0.0, 1.0) < config.missing_rate || never[l];
      if (missing) {
        s.ground_truth.annotated[l] = 0;
        s.ground_truth.coords[l] = {0.0, 0.0};
        s.ground_truth.visibility[l] = 1.0;
        continue;
      }
      s.ground_truth.coords[l] = {proj.coords[l].x + s.bbox.x, proj.coords[l].y + s.bbox.y};
      s.ground_truth.visibility[l] = proj.visibility[l];
    }
    out.samples.push_back(std::move(s));
    if (faces) faces->push_back(std::move(face));
  }
  return out;
}

uint64_t sample_map_seed(uint64_t corpus_seed, const std::string& image_ref) {
  const uLong crc = crc32(0L, reinterpret_cast<const Bytef*>(image_ref.data()),
                          static_cast<uInt>(image_ref.size()));
  return mix_seed(corpus_seed, {0x3a95, static_cast<uint64_t>(crc), image_ref.size()});
}

namespace {

Shape crop_truth(const Sample& sample, int crop) {
  const CropFrame frame{sample.bbox, crop, crop};
  Shape gt = sample.ground_truth;
  for (int l = 0; l < gt.size(); ++l) {
    if (gt.annotated[l]) gt.coords[l] = frame.to_crop(gt.coords[l]);
  }
  return gt;
}

}  // namespace

BlobMaps sample_maps(const Sample& sample, const SynthConfig& config, uint64_t corpus_seed,
                     int crop) {
  return synthesize_blobs(crop_truth(sample, crop), crop, crop, config,
                          sample_map_seed(corpus_seed, sample.image_ref));
}

GrayFace::GrayFace(std::vector<Point2> centers, int height, int width, uint64_t seed)
    : centers_(std::move(centers)), height_(height), width_(width), seed_(seed) {}

float GrayFace::at(int, int x, int y) const {
  if (!in_bounds(x, y)) return 0.0f;
  constexpr double kSigma = 4.0;
  constexpr double kCut = 16.0 * kSigma * kSigma;
  double v = 128.0;
  for (std::size_t l = 0; l < centers_.size(); ++l) {
    const double dx = x - centers_[l].x, dy = y - centers_[l].y;
    const double d2 = dx * dx + dy * dy;
    if (d2 >= kCut) continue;
    const double amplitude = (l % 2 == 0 ? -1.0 : 1.0) * (40.0 + 10.0 * static_cast<double>(l % 3));
    v += amplitude * std::exp(-d2 / (2.0 * kSigma * kSigma));
  }
  const uint64_t h = mix_seed(seed_, {static_cast<uint64_t>(x), static_cast<uint64_t>(y)});
  v += 16.0 * (static_cast<double>(h >> 11) * 0x1.0p-53 - 0.5);
  return static_cast<float>(v);
}

GrayFace sample_gray(const Sample& sample, uint64_t corpus_seed, int crop) {
  const Shape gt = crop_truth(sample, crop);
  std::vector<Point2> centers;
  for (int l = 0; l < gt.size(); ++l) {
    if (gt.annotated[l]) centers.push_back(gt.coords[l]);
  }
  return GrayFace(std::move(centers), crop, crop,
                  mix_seed(sample_map_seed(corpus_seed, sample.image_ref), {0x96a7}));
}

}  // namespace ertalign
