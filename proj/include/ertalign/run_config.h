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

// Settings shared by every subcommand. Values come from built-in defaults,
// then an optional flat "key = value" file, then command-line flags.

#ifndef ERTALIGN_RUN_CONFIG_H_
#define ERTALIGN_RUN_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ertalign/features.h"
#include "ertalign/metrics.h"
#include "ertalign/pipeline.h"
#include "ertalign/synth.h"

namespace ertalign {

struct RunConfig {
  // Paths. Empty schema / model3d / pattern fall back to the shipped files.
  std::string corpus;
  std::string test_corpus;
  std::vector<std::string> corpora;  // cross: "<name>=<dir>" or "<dir>"
  std::string output;
  std::string model;
  std::string schema;
  std::string model3d;
  std::string pattern;

  uint64_t seed = 0;
  int workers = 1;
  std::string init = "3d";
  std::string features = "heatmap";
  bool coarse_to_fine = true;
  double epsilon = 8.0;
  std::string normalization = "height";

  TrainConfig train;
  AugmentConfig augment;
  int augmented_count = 0;
  RobustInitConfig robust;
  double smoothing_sigma = 0.0;
  int crop = 160;
  double focal = 700.0;
  double val_fraction = 0.1;
  double test_fraction = 0.2;
  bool pooled = true;

  SynthCorpusConfig synth;
  bool write_maps = false;
};

// Directory holding the shipped schema, 3D model, pattern and configs.
std::filesystem::path data_dir();

std::filesystem::path resolved_schema(const RunConfig& config);
std::filesystem::path resolved_model3d(const RunConfig& config);
// Empty when the built-in pattern is used.
std::optional<std::filesystem::path> resolved_pattern(const RunConfig& config);

// Training settings with the mode switches, seed and worker count applied.
PipelineConfig pipeline_config(const RunConfig& config);
SynthCorpusConfig synth_config(const RunConfig& config);

// Throws UsageError naming the first missing path or bad value. `command`
// selects which paths are required.
void validate(const RunConfig& config, const std::string& command);

}  // namespace ertalign

#endif  // ERTALIGN_RUN_CONFIG_H_
