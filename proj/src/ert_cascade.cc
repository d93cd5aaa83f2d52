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

#include "ertalign/ert_cascade.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ertalign/error.h"
#include "ertalign/parallel.h"
#include "ertalign/random.h"

namespace ertalign {

InitMode parse_init_mode(const std::string& name) {
  if (name == "mean") return InitMode::kMeanShape;
  if (name == "3d") return InitMode::k3D;
  throw UsageError("unknown init mode '" + name + "' (mean|3d)");
}

FeatureMode parse_feature_mode(const std::string& name) {
  if (name == "heatmap") return FeatureMode::kHeatmap;
  if (name == "gray") return FeatureMode::kGrayscale;
  throw UsageError("unknown feature mode '" + name + "' (gray|heatmap)");
}

std::string to_string(InitMode mode) { return mode == InitMode::k3D ? "3d" : "mean"; }

std::string to_string(FeatureMode mode) {
  return mode == FeatureMode::kGrayscale ? "gray" : "heatmap";
}

void TrainConfig::validate() const {
  if (max_stages < 1) throw std::invalid_argument("T must be at least 1");
  if (coarse_trees < 1 || fine_trees < 1) throw std::invalid_argument("K must be at least 1");
  if (depth < 0 || depth > 16) throw std::invalid_argument("tree depth must lie in [0,16]");
  if (candidates < 1) throw std::invalid_argument("candidate count must be positive");
  if (!(shrinkage > 0.0 && shrinkage <= 1.0)) throw std::invalid_argument("nu must lie in (0,1]");
  if (!(subsample > 0.0 && subsample <= 1.0)) throw std::invalid_argument("eta must lie in (0,1]");
  if (!std::isfinite(early_stop_delta)) throw std::invalid_argument("delta must be finite");
  if (!(scale_floor > 0.0 && scale_floor <= 1.0)) {
    throw std::invalid_argument("scale floor must lie in (0,1]");
  }
  if (tau_range && !(tau_range->first <= tau_range->second)) {
    throw std::invalid_argument("tau range is empty");
  }
}

double mean_nme(std::span<const Shape> current, std::span<const Shape> targets, double d) {
  double sum = 0.0;
  int faces = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const Shape& gt = targets[i];
    double face = 0.0;
    int count = 0;
    for (int l = 0; l < gt.size(); ++l) {
      if (!gt.annotated[l]) continue;
      face += distance(current[i].coords[l], gt.coords[l]);
      ++count;
    }
    if (count == 0) continue;
    sum += 100.0 * face / count / d;
    ++faces;
  }
  if (faces == 0) throw DataError("no face has an annotated landmark");
  return sum / faces;
}

std::vector<FeatureRow> extract_all(const FaceSet& faces, const FreakPattern& pattern,
                                    double scale, FeatureMode mode, int workers) {
  std::vector<FeatureRow> rows(faces.size());
  parallel_for(faces.size(), workers, [&](std::size_t i) {
    const auto src = faces.source(i);
    rows[i] = extract_features(*src, faces.current[i].coords, pattern, scale, mode);
  });
  return rows;
}

namespace {

std::vector<int> draw_subsample(int n, double fraction, uint64_t seed) {
  std::vector<int> ids(n);
  std::iota(ids.begin(), ids.end(), 0);
  if (fraction >= 1.0) return ids;
  const int m = std::max(1, static_cast<int>(std::floor(fraction * n + 1e-9)));
  Rng rng(seed);
  for (int i = 0; i < m; ++i) {
    std::uniform_int_distribution<int> pick(i, n - 1);
    std::swap(ids[i], ids[pick(rng)]);
  }
  ids.resize(m);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

PartsStage train_parts(std::span<const FeatureRow> features, std::span<const Shape> targets,
                       std::vector<Shape>& current,
                       const std::vector<std::vector<int>>& parts, int trees,
                       const TrainConfig& config, double scale, uint64_t seed) {
  const int n = static_cast<int>(current.size());
  if (n == 0) throw DataError("cannot train on an empty set");
  if (features.size() != current.size() || targets.size() != current.size()) {
    throw std::invalid_argument("features, targets and shapes must align");
  }
  PartsStage stage;
  stage.shrinkage = config.shrinkage;
  stage.scale = scale;
  for (const auto& p : parts) stage.parts.push_back({p, {}});

  TreeParams params;
  params.depth = config.depth;
  params.candidates = config.candidates;
  params.tau_range = config.effective_tau_range();
  params.workers = config.workers;
  const double blend = 1.0 / trees;

  for (int k = 0; k < trees; ++k) {
    for (std::size_t p = 0; p < parts.size(); ++p) {
      const auto& ids = parts[p];
      const int size = static_cast<int>(ids.size());
      PartTargets t;
      t.part_size = size;
      t.residuals.resize(static_cast<std::size_t>(n) * 2 * size);
      t.weights.resize(static_cast<std::size_t>(n) * size);
      t.target_vis.resize(t.weights.size());
      t.current_vis.resize(t.weights.size());
      for (int i = 0; i < n; ++i) {
        const Shape& gt = targets[i];
        const Shape& x = current[i];
        for (int j = 0; j < size; ++j) {
          const int l = ids[j];
          const std::size_t at = static_cast<std::size_t>(i) * size + j;
          const double w = gt.annotated[l] ? 1.0 : 0.0;
          t.weights[at] = w;
          t.residuals[2 * at] = w * (gt.coords[l].x - x.coords[l].x);
          t.residuals[2 * at + 1] = w * (gt.coords[l].y - x.coords[l].y);
          t.target_vis[at] = gt.visibility[l];
          t.current_vis[at] = x.visibility[l];
        }
      }
      const auto samples = draw_subsample(n, config.subsample, mix_seed(seed, {0x5ab5, uint64_t(k), p}));
      RegressionTree tree =
          fit_tree(features, t, ids, samples, params, mix_seed(seed, {uint64_t(k), p}));
      for (int i = 0; i < n; ++i) {
        const TreeLeaf& leaf = tree.evaluate([&](const SplitParams& theta) {
          return features[i].feature(theta);
        });
        Shape& x = current[i];
        for (int j = 0; j < size; ++j) {
          const int l = ids[j];
          x.coords[l].x += config.shrinkage * leaf.residual[2 * j];
          x.coords[l].y += config.shrinkage * leaf.residual[2 * j + 1];
          x.visibility[l] += (leaf.visibility[j] - x.visibility[l]) * blend;
        }
      }
      stage.parts[p].trees.push_back(std::move(tree));
    }
  }
  for (auto& x : current) {
    for (double& v : x.visibility) v = std::clamp(v, 0.0, 1.0);
  }
  return stage;
}

std::vector<PartsStage> train_cascade(FaceSet& train, FaceSet& val, const LandmarkSchema& schema,
                                      const FreakPattern& pattern, const TrainConfig& config,
                                      TrainLog* log, const TrainHooks& hooks) {
  config.validate();
  pattern.validate();
  if (train.size() == 0) throw DataError("training set is empty");
  if (val.size() == 0) throw DataError("validation set is empty");
  if (train.current.size() != train.size() || val.current.size() != val.size()) {
    throw std::invalid_argument("every face needs a current shape");
  }

  const std::vector<std::vector<int>> fine_parts = schema.parts();
  std::vector<int> all(schema.size());
  std::iota(all.begin(), all.end(), 0);
  const std::vector<std::vector<int>> coarse_parts{all};

  TrainLog local;
  TrainLog& out = log ? *log : local;
  out = {};
  auto measured_val = [&](int stage, double measured) {
    return hooks.validation_nme ? hooks.validation_nme(stage, measured) : measured;
  };
  out.initial_train_nme = mean_nme(train.current, train.targets, train.normalizer);
  out.initial_val_nme = measured_val(0, mean_nme(val.current, val.targets, val.normalizer));

  const EarlyStopRule rule{config.early_stop_delta};
  std::vector<PartsStage> stages;
  bool fine = false;
  double previous_val = out.initial_val_nme;
  for (int t = 0; t < config.max_stages; ++t) {
    const double scale = stage_scale(t, config.max_stages, config.scale_floor);
    const auto features = extract_all(train, pattern, scale, config.feature_mode, config.workers);
    PartsStage stage =
        train_parts(features, train.targets, train.current, fine ? fine_parts : coarse_parts,
                    fine ? config.fine_trees : config.coarse_trees, config, scale,
                    mix_seed(config.seed, {0x57a9e, uint64_t(t)}));
    stage.fine = fine;

    parallel_for(val.size(), config.workers, [&](std::size_t i) {
      const auto src = val.source(i);
      apply_stage(stage, val.current[i], [&](const SplitParams& theta, const auto& start) {
        return feature_value(*src, start, theta, pattern, scale, config.feature_mode);
      });
    });

    StageLog entry;
    entry.stage = t + 1;
    entry.fine = fine;
    entry.parts = static_cast<int>(stage.parts.size());
    entry.trees = stage.trees_per_part();
    entry.scale = scale;
    entry.train_nme = mean_nme(train.current, train.targets, train.normalizer);
    entry.val_nme = measured_val(t + 1, mean_nme(val.current, val.targets, val.normalizer));
    entry.improvement = EarlyStopRule::improvement(previous_val, entry.val_nme);
    out.stages.push_back(entry);
    if (hooks.on_stage) hooks.on_stage(entry);
    stages.push_back(std::move(stage));

    if (config.early_stopping && rule.should_stop(previous_val, entry.val_nme)) {
      std::ostringstream why;
      why << "validation improvement " << entry.improvement << " < " << config.early_stop_delta
          << " at stage " << entry.stage;
      out.stop_reason = why.str();
      break;
    }
    if (config.coarse_to_fine && !fine && entry.train_nme < entry.val_nme) {
      fine = true;
      out.fine_from = t + 2;
    }
    previous_val = entry.val_nme;
  }
  if (out.stop_reason.empty()) {
    out.stop_reason = "reached the stage budget T=" + std::to_string(config.max_stages);
  }
  return stages;
}

Initialization initialize(const CascadeModel& model, const MapSource& maps) {
  Initialization init;
  if (model.init_mode == InitMode::k3D && model.model3d) {
    ProbabilityMaps smoothed;
    const MapSource* source = &maps;
    if (model.smoothing_sigma > 0.0) {
      smoothed = smooth(render(maps), model.smoothing_sigma);
      source = &smoothed;
    }
    try {
      InitResult r = robust_init(*source, *model.model3d, model.camera, model.robust,
                                 model.init_seed);
      init.shape = std::move(r.shape);
      init.pose = r.pose;
      init.score = r.score;
      return init;
    } catch (const InitError&) {
      init.fell_back = true;
    }
  }
  init.shape = anchor_shape(model.mean_shape, {Rect{}, model.map_width, model.map_height});
  return init;
}

Shape run_cascade(const CascadeModel& model, const MapSource& features, Shape start) {
  for (const auto& stage : model.stages) {
    apply_stage(stage, start, [&](const SplitParams& theta, const auto& coords) {
      return feature_value(features, coords, theta, model.pattern, stage.scale,
                           model.feature_mode);
    });
  }
  return start;
}

Prediction predict(const CascadeModel& model, const MapSource& maps, const Rect& bbox,
                   const MapSource* features) {
  if (maps.landmarks() != model.schema.size()) {
    throw SchemaError("maps carry " + std::to_string(maps.landmarks()) + " landmarks, model " +
                      std::to_string(model.schema.size()));
  }
  if (maps.width() != model.map_width || maps.height() != model.map_height) {
    throw SchemaError("map size disagrees with the model crop size");
  }
  Initialization init = initialize(model, maps);
  Prediction p;
  p.init_fell_back = init.fell_back;
  p.initial = init.shape;
  p.crop_shape = run_cascade(model, features ? *features : maps, std::move(init.shape));
  const CropFrame frame = model.frame(bbox);
  p.shape = p.crop_shape;
  for (auto& c : p.shape.coords) c = frame.to_image(c);
  return p;
}

}  // namespace ertalign
