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

#include "ertalign/pipeline.h"

#include <cmath>

#include "ertalign/error.h"
#include "ertalign/parallel.h"
#include "ertalign/random.h"

namespace ertalign {

namespace {

// WarpedMaps over a base it keeps alive.
class OwnedWarp final : public MapSource {
 public:
  OwnedWarp(std::shared_ptr<const MapSource> base, const AugmentedSample& a)
      : base_(std::move(base)), view_(*base_, a.warp, a.landmark_map, a.occlusions) {}
  int landmarks() const override { return view_.landmarks(); }
  int height() const override { return view_.height(); }
  int width() const override { return view_.width(); }
  float at(int l, int x, int y) const override { return view_.at(l, x, y); }

 private:
  std::shared_ptr<const MapSource> base_;
  WarpedMaps view_;
};

Shape crop_truth(const Sample& s, int crop) {
  const CropFrame frame{s.bbox, crop, crop};
  Shape gt = s.ground_truth;
  for (int l = 0; l < gt.size(); ++l) {
    if (gt.annotated[l]) gt.coords[l] = frame.to_crop(gt.coords[l]);
  }
  return gt;
}

}  // namespace

Shape training_mean_shape(const Dataset& train, const Model3D* model, const Camera& camera) {
  if (train.empty()) throw DataError("mean shape needs a non-empty training set");
  const int n = train.schema.size();
  std::vector<double> sx(n, 0.0), sy(n, 0.0);
  std::vector<int> count(n, 0);
  for (const auto& s : train.samples) {
    for (int l = 0; l < n; ++l) {
      if (!s.ground_truth.annotated[l]) continue;
      ++count[l];
    }
  }
  bool complete = true;
  for (int c : count) complete = complete && c > 0;
  if (complete || model == nullptr) return mean_shape_init(train);

  // Mean over annotated entries, then pose the model onto it.
  for (const auto& s : train.samples) {
    for (int l = 0; l < n; ++l) {
      if (!s.ground_truth.annotated[l]) continue;
      sx[l] += (s.ground_truth.coords[l].x - s.bbox.x) / s.bbox.width;
      sy[l] += (s.ground_truth.coords[l].y - s.bbox.y) / s.bbox.height;
    }
  }
  const double w = 2.0 * camera.cx, h = 2.0 * camera.cy;
  std::vector<Correspondence> pairs;
  for (int l : model->distinct_ids) {
    if (count[l] == 0) continue;
    pairs.push_back({{sx[l] / count[l] * w, sy[l] / count[l] * h}, model->points[l]});
  }
  if (pairs.size() < 4) {
    throw DataError("too few annotated landmarks to complete the mean shape from the 3D model");
  }
  const RigidPose pose = fit_pose(pairs, camera);
  const Projection proj = project_points(*model, pose);
  Shape mean(n);
  for (int l = 0; l < n; ++l) {
    mean.coords[l] = count[l] > 0 ? Point2{sx[l] / count[l], sy[l] / count[l]}
                                  : Point2{proj.coords[l].x / w, proj.coords[l].y / h};
  }
  return mean;
}

CascadeModel blank_model(const LandmarkSchema& schema, const FreakPattern& pattern,
                         const std::optional<Model3D>& model3d, const PipelineConfig& config) {
  config.train.validate();
  if (config.init_mode == InitMode::k3D && !model3d) {
    throw UsageError("3D initialisation needs a 3D model");
  }
  if (model3d && model3d->size() != schema.size()) {
    throw SchemaError("3D model and schema disagree on the landmark count");
  }
  CascadeModel m;
  m.schema = schema;
  m.pattern = pattern;
  m.init_mode = config.init_mode;
  m.feature_mode = config.train.feature_mode;
  m.map_width = m.map_height = config.crop;
  m.model3d = model3d;
  m.camera = Camera::for_crop(config.crop, config.crop, config.focal);
  m.robust = config.robust;
  m.smoothing_sigma = config.smoothing_sigma;
  m.init_seed = mix_seed(config.train.seed, {0x1a17});
  m.config = config.train;
  if (!m.config.tau_range) m.config.tau_range = default_tau_range(m.config.feature_mode);
  return m;
}

std::shared_ptr<const MapSource> feature_source(const MapProviders& providers,
                                                const Sample& sample, FeatureMode mode) {
  if (mode == FeatureMode::kGrayscale) {
    if (!providers.gray) throw DataError("no intensity source for the grayscale feature mode");
    return providers.gray(sample);
  }
  return providers.maps(sample);
}

PipelineResult train_model(const Dataset& train, const Dataset& val,
                           const MapProviders& train_maps, const MapProviders& val_maps,
                           const FreakPattern& pattern, const std::optional<Model3D>& model3d,
                           const PipelineConfig& config, const TrainHooks& hooks) {
  if (train.empty()) throw DataError("training set is empty");
  if (val.empty()) throw DataError("validation set is empty");
  if (!(train.schema == val.schema)) throw SchemaError("train and validation schemas differ");
  PipelineResult result;
  CascadeModel& model = result.model;
  model = blank_model(train.schema, pattern, model3d, config);
  model.mean_shape =
      training_mean_shape(train, model3d ? &*model3d : nullptr, model.camera);
  const int workers = config.train.workers;
  const int crop = config.crop;
  const FeatureMode mode = config.train.feature_mode;

  // Starting shapes of the source faces, computed exactly as at test time.
  std::vector<InitEstimate> inits(train.size());
  std::vector<Shape> sources(train.size());
  parallel_for(train.size(), workers, [&](std::size_t i) {
    const Sample& s = train.samples[i];
    const auto maps = train_maps.maps(s);
    Initialization init = initialize(model, *maps);
    inits[i].initial = std::move(init.shape);
    inits[i].pose = init.pose;
    sources[i] = crop_truth(s, crop);
  });
  const int target = std::max<int>(config.augmented_count, static_cast<int>(train.size()));
  const auto augmented =
      augment(sources, inits, target, config.augment, train.schema,
              model3d ? &*model3d : nullptr, crop, crop, mix_seed(config.train.seed, {0xa06}));

  FaceSet train_set;
  train_set.normalizer = crop;
  train_set.targets.reserve(augmented.size());
  train_set.current.reserve(augmented.size());
  for (const auto& a : augmented) {
    train_set.targets.push_back(a.target);
    train_set.current.push_back(a.initial);
  }
  train_set.source = [&](std::size_t i) -> std::shared_ptr<const MapSource> {
    const AugmentedSample& a = augmented[i];
    auto base = feature_source(train_maps, train.samples[a.source], mode);
    if (a.warp.is_identity() && a.occlusions.empty()) return base;
    return std::make_shared<OwnedWarp>(std::move(base), a);
  };

  FaceSet val_set;
  val_set.normalizer = crop;
  val_set.targets.resize(val.size());
  val_set.current.resize(val.size());
  parallel_for(val.size(), workers, [&](std::size_t i) {
    const Sample& s = val.samples[i];
    val_set.targets[i] = crop_truth(s, crop);
    val_set.current[i] = initialize(model, *val_maps.maps(s)).shape;
  });
  val_set.source = [&](std::size_t i) {
    return feature_source(val_maps, val.samples[i], mode);
  };

  model.stages =
      train_cascade(train_set, val_set, train.schema, pattern, model.config, &result.log, hooks);
  return result;
}

std::vector<Prediction> predict_all(const CascadeModel& model, const Dataset& data,
                                    const MapProviders& providers, int workers) {
  if (!(data.schema == model.schema)) {
    if (data.schema.size() != model.schema.size()) {
      throw SchemaError("test set schema disagrees with the model schema");
    }
    for (int l = 0; l < data.schema.size(); ++l) {
      if (data.schema[l].name != model.schema[l].name) {
        throw SchemaError("test set schema disagrees with the model schema at landmark " +
                          data.schema[l].name);
      }
    }
  }
  std::vector<Prediction> out(data.size());
  parallel_for(data.size(), workers, [&](std::size_t i) {
    const Sample& s = data.samples[i];
    const auto maps = providers.maps(s);
    std::shared_ptr<const MapSource> features;
    if (model.feature_mode == FeatureMode::kGrayscale) {
      features = feature_source(providers, s, model.feature_mode);
    }
    out[i] = predict(model, *maps, s.bbox, features.get());
  });
  return out;
}

}  // namespace ertalign
