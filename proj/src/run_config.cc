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

#include "ertalign/run_config.h"

#include <cstdlib>

#include "ertalign/error.h"
#include "ertalign/ert_cascade.h"

#ifndef ERTALIGN_DATA_DIR
#define ERTALIGN_DATA_DIR "data"
#endif

namespace ertalign {

namespace fs = std::filesystem;

namespace {

void require(const std::string& value, const std::string& flag, const std::string& command) {
  if (value.empty()) throw UsageError(command + " needs --" + flag);
}

void require_path(const std::string& value, const std::string& flag, const std::string& command) {
  require(value, flag, command);
  if (!fs::exists(value)) throw IoError("--" + flag + " " + value + " does not exist");
}

}  // namespace

fs::path data_dir() {
  if (const char* env = std::getenv("ERTALIGN_DATA_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return ERTALIGN_DATA_DIR;
}

fs::path resolved_schema(const RunConfig& config) {
  return config.schema.empty() ? data_dir() / "face24.schema" : fs::path(config.schema);
}

fs::path resolved_model3d(const RunConfig& config) {
  return config.model3d.empty() ? data_dir() / "face24.model3d" : fs::path(config.model3d);
}

std::optional<fs::path> resolved_pattern(const RunConfig& config) {
  if (config.pattern.empty()) return std::nullopt;
  return fs::path(config.pattern);
}

PipelineConfig pipeline_config(const RunConfig& config) {
  PipelineConfig p;
  p.train = config.train;
  p.train.seed = config.seed;
  p.train.workers = config.workers;
  p.train.feature_mode = parse_feature_mode(config.features);
  p.train.coarse_to_fine = config.coarse_to_fine;
  p.augment = config.augment;
  p.augmented_count = config.augmented_count;
  p.init_mode = parse_init_mode(config.init);
  p.robust = config.robust;
  p.smoothing_sigma = config.smoothing_sigma;
  p.crop = config.crop;
  p.focal = config.focal;
  return p;
}

SynthCorpusConfig synth_config(const RunConfig& config) {
  SynthCorpusConfig s = config.synth;
  s.seed = config.seed;
  s.crop = config.crop;
  s.focal = config.focal;
  return s;
}

void validate(const RunConfig& config, const std::string& command) {
  if (config.workers < 1) throw UsageError("--workers must be at least 1");
  if (config.crop < 16) throw UsageError("--crop must be at least 16");
  if (!(config.focal > 0.0)) throw UsageError("--focal must be positive");
  if (!(config.epsilon > 0.0)) throw UsageError("--epsilon must be positive");
  if (!(config.val_fraction > 0.0 && config.val_fraction < 1.0)) {
    throw UsageError("--val-fraction must lie in (0,1)");
  }
  if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
    throw UsageError("--test-fraction must lie in (0,1)");
  }
  parse_init_mode(config.init);
  parse_feature_mode(config.features);
  parse_normalization(config.normalization);
  try {
    config.train.validate();
    config.augment.validate();
    synth_config(config).validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (config.robust.iterations < 1) throw UsageError("--ransac-iterations must be positive");
  if (config.robust.subset_size < 4) throw UsageError("--subset-size must be at least 4");
  if (!config.schema.empty()) require_path(config.schema, "schema", command);
  if (!config.model3d.empty()) require_path(config.model3d, "model3d", command);
  if (!config.pattern.empty()) require_path(config.pattern, "pattern", command);

  if (command == "synth") {
    require(config.output, "out", command);
    if (!fs::exists(resolved_schema(config))) throw IoError("schema file not found");
    if (!fs::exists(resolved_model3d(config))) throw IoError("3D model file not found");
  } else if (command == "train" || command == "ablate") {
    require_path(config.corpus, "corpus", command);
    require(config.output, "out", command);
    if (command == "ablate" || parse_init_mode(config.init) == InitMode::k3D) {
      if (!fs::exists(resolved_model3d(config))) throw IoError("3D model file not found");
    }
  } else if (command == "predict" || command == "eval") {
    require_path(config.model, "model", command);
    if (config.test_corpus.empty()) {
      require_path(config.corpus, "corpus", command);
    } else {
      require_path(config.test_corpus, "test-corpus", command);
    }
    require(config.output, "out", command);
  } else if (command == "cross") {
    if (config.corpora.empty()) throw UsageError("cross needs --corpora");
    for (const auto& c : config.corpora) {
      const auto eq = c.find('=');
      require_path(eq == std::string::npos ? c : c.substr(eq + 1), "corpora", command);
    }
    require(config.output, "out", command);
  } else {
    throw UsageError("unknown command " + command);
  }
}

}  // namespace ertalign
