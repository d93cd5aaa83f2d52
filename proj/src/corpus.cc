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

#include "ertalign/corpus.h"

#include <cctype>
#include <json.hpp>

#include "ertalign/binary_io.h"
#include "ertalign/error.h"
#include "ertalign/synth.h"

namespace ertalign {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string map_file_name(const std::string& image_ref) {
  std::string out = image_ref;
  for (char& c : out) {
    const auto u = static_cast<unsigned char>(c);
    if (!std::isalnum(u) && c != '-' && c != '_' && c != '.') c = '_';
  }
  return out + ".pmap";
}

MapProviders synthetic_providers(const SynthConfig& maps, uint64_t seed, int crop) {
  MapProviders p;
  p.maps = [maps, seed, crop](const Sample& s) -> std::shared_ptr<const MapSource> {
    return std::make_shared<BlobMaps>(sample_maps(s, maps, seed, crop));
  };
  p.gray = [seed, crop](const Sample& s) -> std::shared_ptr<const MapSource> {
    return std::make_shared<GrayFace>(sample_gray(s, seed, crop));
  };
  return p;
}

MapProviders Corpus::providers() const {
  if (manifest.synthetic && !fs::exists(dir / "maps")) {
    return synthetic_providers(manifest.maps, manifest.seed, manifest.crop);
  }
  MapProviders p;
  const fs::path maps_dir = dir / "maps";
  const fs::path gray_dir = dir / "gray";
  const int crop = manifest.crop;
  p.maps = [maps_dir, crop](const Sample& s) -> std::shared_ptr<const MapSource> {
    auto m = std::make_shared<ProbabilityMaps>(read_maps(maps_dir / map_file_name(s.image_ref)));
    if (m->width() != crop || m->height() != crop) {
      throw FormatError("maps of " + s.image_ref + " are not " + std::to_string(crop) + "x" +
                        std::to_string(crop));
    }
    return m;
  };
  if (fs::exists(gray_dir)) {
    p.gray = [gray_dir](const Sample& s) -> std::shared_ptr<const MapSource> {
      return std::make_shared<ProbabilityMaps>(read_maps(gray_dir / map_file_name(s.image_ref)));
    };
  } else if (manifest.synthetic) {
    p.gray = synthetic_providers(manifest.maps, manifest.seed, crop).gray;
  }
  return p;
}

Corpus load_corpus(const fs::path& dir) {
  Corpus c;
  c.dir = dir;
  const fs::path manifest_path = dir / "manifest.json";
  json m;
  try {
    m = json::parse(read_file(manifest_path));
    c.manifest.synthetic = m.at("maps").get<std::string>() == "synthetic";
    c.manifest.crop = m.value("crop", 160);
    c.manifest.seed = m.value("seed", uint64_t{0});
    if (m.contains("synth")) {
      const json& s = m.at("synth");
      c.manifest.maps.peak_sigma = s.at("peak_sigma");
      c.manifest.maps.coordinate_noise_sigma = s.at("coordinate_noise_sigma");
      c.manifest.maps.outlier_rate = s.at("outlier_rate");
      c.manifest.maps.occluded_dropout = s.at("occluded_dropout");
      c.manifest.maps.floor = s.at("floor");
    }
    if (m.contains("generator")) c.manifest.extra = m.at("generator").dump();
  } catch (const json::exception& e) {
    throw FormatError("bad manifest " + manifest_path.string() + ": " + e.what());
  }
  const LandmarkSchema schema = load_schema(dir / "schema.txt");
  c.data = load_dataset(dir / "annotations.jsonl", schema);
  return c;
}

void write_corpus(const fs::path& dir, const Dataset& data, const CorpusManifest& manifest,
                  bool write_map_files) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  save_dataset(data, dir / "annotations.jsonl");
  write_file(dir / "schema.txt", format_schema(data.schema));

  json m{{"maps", manifest.synthetic ? "synthetic" : "files"},
         {"crop", manifest.crop},
         {"seed", manifest.seed},
         {"count", data.size()}};
  if (manifest.synthetic) {
    m["synth"] = {{"peak_sigma", manifest.maps.peak_sigma},
                  {"coordinate_noise_sigma", manifest.maps.coordinate_noise_sigma},
                  {"outlier_rate", manifest.maps.outlier_rate},
                  {"occluded_dropout", manifest.maps.occluded_dropout},
                  {"floor", manifest.maps.floor}};
  }
  if (!manifest.extra.empty()) m["generator"] = json::parse(manifest.extra);
  write_file(dir / "manifest.json", m.dump(2) + "\n");

  if (write_map_files && manifest.synthetic) {
    fs::create_directories(dir / "maps");
    fs::create_directories(dir / "gray");
    for (const auto& s : data.samples) {
      write_maps(render(sample_maps(s, manifest.maps, manifest.seed, manifest.crop)),
                 dir / "maps" / map_file_name(s.image_ref));
      write_maps(render(sample_gray(s, manifest.seed, manifest.crop)),
                 dir / "gray" / map_file_name(s.image_ref));
    }
  }
}

}  // namespace ertalign
