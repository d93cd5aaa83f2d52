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

// Synthetic face corpus: random rigid poses of the 3D model with low-rank
// non-rigid deformations, projected ground truth, and the map surrogate.

#ifndef ERTALIGN_SYNTH_H_
#define ERTALIGN_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ertalign/heatmap.h"
#include "ertalign/pose_init.h"
#include "ertalign/shape_data.h"

namespace ertalign {

// How the brow modes follow the mouth modes. Correlated and anticorrelated
// corpora contain disjoint part-deformation combinations.
enum class Coupling { kIndependent, kCorrelated, kAnticorrelated };

Coupling parse_coupling(const std::string& name);
std::string to_string(Coupling c);

struct DeformationMode {
  std::string name;
  // (landmark name, displacement in model units per unit coefficient)
  std::vector<std::pair<std::string, Eigen::Vector3d>> displacements;
};

// jaw_open, smile, brow_raise, brow_asym, nose_wide, face_wide. Landmark
// names follow the shipped 24-point schema; unknown names are ignored.
const std::vector<DeformationMode>& deformation_modes();

struct SynthCorpusConfig {
  int count = 100;
  uint64_t seed = 1;
  int crop = 160;
  double focal = 700.0;
  double depth = 800.0;
  double yaw_deg = 30.0;
  double pitch_deg = 15.0;
  double roll_deg = 15.0;
  double shift_px = 3.0;        // uniform jitter of the face centre in the crop
  double deformation = 4.0;     // coefficient standard deviation, model units
  Coupling coupling = Coupling::kIndependent;
  std::vector<double> mode_means;  // per mode, in units of `deformation`; default 0
  double missing_rate = 0.0;       // per-landmark chance of dropping the annotation
  std::vector<std::string> never_annotated;
  SynthConfig maps;

  void validate() const;
};

struct SynthFace {
  RigidPose pose;
  std::vector<double> coefficients;
  std::vector<Point2> rigid;  // crop-frame projection of the undeformed model
};

// Bounding boxes are 1:1 with the crop, offset inside a larger image.
Dataset make_corpus(const Model3D& model, const LandmarkSchema& schema,
                    const SynthCorpusConfig& config, std::vector<SynthFace>* faces = nullptr);

// Seed of the synthetic maps of one sample.
uint64_t sample_map_seed(uint64_t corpus_seed, const std::string& image_ref);

// Map surrogate for a sample (its ground truth moved into the crop frame).
BlobMaps sample_maps(const Sample& sample, const SynthConfig& config, uint64_t corpus_seed,
                     int crop);

// Single-channel synthetic intensity image used by the grayscale ablation:
// mid-grey with one light or dark blob per landmark plus fixed pixel noise.
class GrayFace final : public MapSource {
 public:
  GrayFace(std::vector<Point2> centers, int height, int width, uint64_t seed);
  int landmarks() const override { return 1; }
  int height() const override { return height_; }
  int width() const override { return width_; }
  float at(int l, int x, int y) const override;

 private:
  std::vector<Point2> centers_;
  int height_;
  int width_;
  uint64_t seed_;
};

GrayFace sample_gray(const Sample& sample, uint64_t corpus_seed, int crop);

}  // namespace ertalign

#endif  // ERTALIGN_SYNTH_H_
