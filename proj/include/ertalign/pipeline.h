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

// End-to-end training and batch prediction: initial shapes, augmentation,
// crop-frame face sets and the cascade, wired together the same way for the
// command-line tool and the tests.

#ifndef ERTALIGN_PIPELINE_H_
#define ERTALIGN_PIPELINE_H_

#include <optional>
#include <vector>

#include "ertalign/augment.h"
#include "ertalign/corpus.h"
#include "ertalign/ert_cascade.h"

namespace ertalign {

struct PipelineConfig {
  TrainConfig train;
  AugmentConfig augment;
  int augmented_count = 0;  // N_A; anything below the training size means "no extra copies"
  InitMode init_mode = InitMode::k3D;
  RobustInitConfig robust;
  double smoothing_sigma = 0.0;
  int crop = 160;
  double focal = 700.0;
};

struct PipelineResult {
  CascadeModel model;
  TrainLog log;
};

// Mean shape of the annotated training data. Landmarks that are never
// annotated are filled from the 3D model posed onto the other landmarks;
// without a model they are an error.
Shape training_mean_shape(const Dataset& train, const Model3D* model, const Camera& camera);

// Model fields that do not depend on training (modes, schema, camera, ...).
CascadeModel blank_model(const LandmarkSchema& schema, const FreakPattern& pattern,
                         const std::optional<Model3D>& model3d, const PipelineConfig& config);

PipelineResult train_model(const Dataset& train, const Dataset& val,
                           const MapProviders& train_maps, const MapProviders& val_maps,
                           const FreakPattern& pattern, const std::optional<Model3D>& model3d,
                           const PipelineConfig& config, const TrainHooks& hooks = {});

// Feature source of a sample for the model's feature mode.
std::shared_ptr<const MapSource> feature_source(const MapProviders& providers,
                                                const Sample& sample, FeatureMode mode);

std::vector<Prediction> predict_all(const CascadeModel& model, const Dataset& data,
                                    const MapProviders& providers, int workers);

}  // namespace ertalign

#endif  // ERTALIGN_PIPELINE_H_
