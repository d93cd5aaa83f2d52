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

// Corpus directories:
//
//   annotations.jsonl   one face per line
//   schema.txt          landmark schema
//   manifest.json       map source ("synthetic" or "files"), crop size, seed
//   maps/<ref>.pmap     per-face probability maps (file-backed corpora)
//   gray/<ref>.pmap     per-face intensity grid (optional)
//
// Synthetic corpora regenerate their maps from the manifest on demand, so
// nothing but the annotations needs to be stored.

#ifndef ERTALIGN_CORPUS_H_
#define ERTALIGN_CORPUS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>

#include "ertalign/heatmap.h"
#include "ertalign/shape_data.h"

namespace ertalign {

using SampleSourceFn = std::function<std::shared_ptr<const MapSource>(const Sample&)>;

struct MapProviders {
  SampleSourceFn maps;
  SampleSourceFn gray;  // may be empty when no intensity source exists
};

struct CorpusManifest {
  bool synthetic = true;
  int crop = 160;
  uint64_t seed = 0;
  SynthConfig maps;
  std::string extra;  // free-form JSON object with generator settings
};

// File name used for the maps of `image_ref` (unsafe characters replaced).
std::string map_file_name(const std::string& image_ref);

struct Corpus {
  std::filesystem::path dir;
  Dataset data;
  CorpusManifest manifest;

  MapProviders providers() const;
};

Corpus load_corpus(const std::filesystem::path& dir);

// Writes annotations, schema and manifest; with `write_map_files` also the
// dense maps and intensity grids of synthetic samples.
void write_corpus(const std::filesystem::path& dir, const Dataset& data,
                  const CorpusManifest& manifest, bool write_map_files);

// Providers for a synthetic corpus held in memory.
MapProviders synthetic_providers(const SynthConfig& maps, uint64_t seed, int crop);

}  // namespace ertalign

#endif  // ERTALIGN_CORPUS_H_
