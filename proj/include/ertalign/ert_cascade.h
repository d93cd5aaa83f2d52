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

// Coarse-to-fine cascade of boosted regression-tree ensembles. All shapes
// handled here are in crop coordinates; image-frame conversion happens at
// the model boundary (predict).

#ifndef ERTALIGN_ERT_CASCADE_H_
#define ERTALIGN_ERT_CASCADE_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ertalign/features.h"
#include "ertalign/heatmap.h"
#include "ertalign/pose_init.h"
#include "ertalign/shape_data.h"
#include "ertalign/tree.h"

namespace ertalign {

enum class InitMode { kMeanShape, k3D };

InitMode parse_init_mode(const std::string& name);  // "mean" | "3d"
FeatureMode parse_feature_mode(const std::string& name);  // "gray" | "heatmap"
std::string to_string(InitMode mode);
std::string to_string(FeatureMode mode);

struct TrainConfig {
  int max_stages = 20;   // T
  int coarse_trees = 50;  // K1
  int fine_trees = 50;    // K2
  int depth = 4;
  int candidates = 200;
  double shrinkage = 0.1;  // nu
  double subsample = 0.5;  // eta, drawn afresh for every tree
  bool early_stopping = true;
  double early_stop_delta = 0.01;  // relative validation improvement
  bool coarse_to_fine = true;
  FeatureMode feature_mode = FeatureMode::kHeatmap;
  double scale_floor = 0.2;
  std::optional<std::pair<double, double>> tau_range;  // default per feature mode
  uint64_t seed = 0;
  int workers = 1;

  void validate() const;
  std::pair<double, double> effective_tau_range() const {
    return tau_range ? *tau_range : default_tau_range(feature_mode);
  }
};

struct PartRegressor {
  std::vector<int> landmarks;
  std::vector<RegressionTree> trees;
};

struct PartsStage {
  std::vector<PartRegressor> parts;
  double shrinkage = 0.1;
  double scale = 1.0;  // pattern scale used by every tree of the stage
  bool fine = false;

  // Trees per part; visibility blends with weight 1/K.
  int trees_per_part() const {
    return parts.empty() ? 0 : static_cast<int>(parts.front().trees.size());
  }
};

// Applies one stage to a single face. Features are read at the stage-start
// coordinates through `feature(theta, start_coords)`.
template <typename FeatureFn>
void apply_stage(const PartsStage& stage, Shape& shape, FeatureFn&& feature) {
  const std::vector<Point2> start = shape.coords;
  const int k_count = stage.trees_per_part();
  const double blend = k_count > 0 ? 1.0 / k_count : 0.0;
  for (int k = 0; k < k_count; ++k) {
    for (const auto& part : stage.parts) {
      const TreeLeaf& leaf = part.trees[k].evaluate(
          [&](const SplitParams& theta) { return feature(theta, start); });
      for (std::size_t j = 0; j < part.landmarks.size(); ++j) {
        const int l = part.landmarks[j];
        shape.coords[l].x += stage.shrinkage * leaf.residual[2 * j];
        shape.coords[l].y += stage.shrinkage * leaf.residual[2 * j + 1];
        shape.visibility[l] += (leaf.visibility[j] - shape.visibility[l]) * blend;
      }
    }
  }
  for (double& v : shape.visibility) v = std::clamp(v, 0.0, 1.0);
}

// Supplies the feature source of face i (maps, or the grayscale grid in the
// grayscale ablation).
using FeatureSourceFn = std::function<std::shared_ptr<const MapSource>(std::size_t)>;

// Faces in crop coordinates with their running estimates.
struct FaceSet {
  std::vector<Shape> targets;  // ground truth with masks and visibility labels
  std::vector<Shape> current;  // x^t, v^t
  FeatureSourceFn source;
  double normalizer = 160.0;  // crop-frame face size used for training NME

  std::size_t size() const { return targets.size(); }
};

// Mean training NME (percent) over faces with at least one annotated landmark.
double mean_nme(std::span<const Shape> current, std::span<const Shape> targets, double d);

std::vector<FeatureRow> extract_all(const FaceSet& faces, const FreakPattern& pattern,
                                    double scale, FeatureMode mode, int workers);

// Boosts K trees per part on `features`, updating `current` in place.
PartsStage train_parts(std::span<const FeatureRow> features, std::span<const Shape> targets,
                       std::vector<Shape>& current,
                       const std::vector<std::vector<int>>& parts, int trees,
                       const TrainConfig& config, double scale, uint64_t seed);

struct StageLog {
  int stage = 0;  // 1-based
  bool fine = false;
  int parts = 0;
  int trees = 0;
  double scale = 1.0;
  double train_nme = 0.0;
  double val_nme = 0.0;
  double improvement = 0.0;  // relative validation improvement over the previous stage
};

struct TrainLog {
  double initial_train_nme = 0.0;
  double initial_val_nme = 0.0;
  std::vector<StageLog> stages;
  std::optional<int> fine_from;  // first fine stage, 1-based
  std::string stop_reason;
};

struct TrainHooks {
  // Replaces the measured validation NME after stage `stage` (0 = initial).
  std::function<double(int stage, double measured)> validation_nme;
  std::function<void(const StageLog&)> on_stage;
};

// Stage loop with the coarse-to-fine trigger and validation early stopping.
// `train.current` and `val.current` are advanced in place.
std::vector<PartsStage> train_cascade(FaceSet& train, FaceSet& val, const LandmarkSchema& schema,
                                      const FreakPattern& pattern, const TrainConfig& config,
                                      TrainLog* log = nullptr, const TrainHooks& hooks = {});

// Decides whether stage training continues given the validation NME before
// and after a stage.
struct EarlyStopRule {
  double delta = 0.01;
  static double improvement(double before, double after) {
    return before > 0.0 ? (before - after) / before : 0.0;
  }
  bool should_stop(double before, double after) const {
    return improvement(before, after) < delta;
  }
};

struct CascadeModel {
  LandmarkSchema schema;
  FreakPattern pattern;
  InitMode init_mode = InitMode::k3D;
  FeatureMode feature_mode = FeatureMode::kHeatmap;
  int map_width = 160;
  int map_height = 160;
  Shape mean_shape;  // bbox-normalised
  std::optional<Model3D> model3d;
  Camera camera;
  RobustInitConfig robust;
  double smoothing_sigma = 0.0;  // 0 disables smoothing before robust init
  uint64_t init_seed = 0;
  TrainConfig config;
  std::vector<PartsStage> stages;

  CropFrame frame(const Rect& bbox) const { return {bbox, map_width, map_height}; }
};

struct Initialization {
  Shape shape;  // crop frame
  std::optional<RigidPose> pose;
  double score = 0.0;
  bool fell_back = false;  // robust init failed; mean shape used
};

// x^0 for one face from the model's init mode.
Initialization initialize(const CascadeModel& model, const MapSource& maps);

struct Prediction {
  Shape shape;       // image frame, visibility in [0,1]
  Shape crop_shape;  // crop frame
  Shape initial;     // crop frame x^0
  bool init_fell_back = false;
};

// `maps` drive initialisation; `features` (defaults to maps) drive the trees.
Prediction predict(const CascadeModel& model, const MapSource& maps, const Rect& bbox,
                   const MapSource* features = nullptr);

// Runs the cascade from a given crop-frame start.
Shape run_cascade(const CascadeModel& model, const MapSource& features, Shape start);

}  // namespace ertalign

#endif  // ERTALIGN_ERT_CASCADE_H_
