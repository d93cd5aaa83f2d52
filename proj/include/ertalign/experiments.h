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

// Multi-model experiments: the cross-dataset matrix and ablation sweeps.

#ifndef ERTALIGN_EXPERIMENTS_H_
#define ERTALIGN_EXPERIMENTS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ertalign/metrics.h"
#include "ertalign/pipeline.h"

namespace ertalign {

struct NamedCorpus {
  std::string name;
  Dataset data;
  MapProviders providers;
};

struct CrossOptions {
  PipelineConfig pipeline;
  double test_fraction = 0.2;
  double val_fraction = 0.1;
  bool pooled = true;  // adds the "All" model and test set when schemas agree
  uint64_t seed = 0;
};

struct CrossResult {
  CrossMatrix matrix;
  std::vector<TrainLog> logs;  // one per row
};

CrossResult cross_experiment(std::span<const NamedCorpus> corpora, const FreakPattern& pattern,
                             const std::optional<Model3D>& model3d, const CrossOptions& options);

struct AblationVariant {
  std::string name;
  InitMode init = InitMode::k3D;
  FeatureMode features = FeatureMode::kHeatmap;
  bool coarse_to_fine = true;
};

// Full model and one variant per ablated component.
std::vector<AblationVariant> default_ablation();

struct AblationRow {
  AblationVariant variant;
  EvalReport report;
  int stages = 0;
};

std::vector<AblationRow> run_ablation(const Dataset& train, const Dataset& val,
                                      const Dataset& test, const MapProviders& providers,
                                      const FreakPattern& pattern,
                                      const std::optional<Model3D>& model3d,
                                      const PipelineConfig& base,
                                      std::span<const AblationVariant> variants,
                                      Normalization normalization, double epsilon);

std::string format_ablation(std::span<const AblationRow> rows);

}  // namespace ertalign

#endif  // ERTALIGN_EXPERIMENTS_H_
