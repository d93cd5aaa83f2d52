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

#include "ertalign/shape_data.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "ertalign/error.h"
#include "ertalign/random.h"
#include "json.hpp"

namespace ertalign {

using nlohmann::json;

int Shape::annotated_count() const {
  return static_cast<int>(std::count(annotated.begin(), annotated.end(), 1));
}

void Shape::validate() const {
  if (visibility.size() != coords.size() || annotated.size() != coords.size()) {
    throw SchemaError("shape arrays disagree in length");
  }
  for (double v : visibility) {
    if (!(v >= 0.0 && v <= 1.0)) throw SchemaError("visibility outside [0,1]");
  }
  for (uint8_t a : annotated) {
    if (a > 1) throw SchemaError("annotated flag must be 0 or 1");
  }
}

void Sample::validate() const {
  ground_truth.validate();
  if (!(bbox.width > 0.0 && bbox.height > 0.0)) {
    throw SchemaError("bbox must have positive width and height");
  }
  if (initial) {
    initial->validate();
    if (initial->size() != ground_truth.size()) {
      throw SchemaError("initial shape and ground truth differ in landmark count");
    }
  }
}

// --------------------------------------------------------------------------
// Schema

LandmarkSchema::LandmarkSchema(std::vector<std::string> part_names,
                               std::vector<LandmarkInfo> landmarks)
    : part_names_(std::move(part_names)), landmarks_(std::move(landmarks)) {
  validate();
}

void LandmarkSchema::validate() const {
  const int n = size();
  if (n == 0) throw SchemaError("schema has no landmarks");
  std::vector<int> part_sizes(part_names_.size(), 0);
  for (int i = 0; i < n; ++i) {
    const auto& lm = landmarks_[i];
    if (lm.part < 0 || lm.part >= part_count()) {
      throw SchemaError("landmark " + lm.name + " references unknown part " +
                        std::to_string(lm.part));
    }
    ++part_sizes[lm.part];
    if (lm.mirror < 0 || lm.mirror >= n) {
      throw SchemaError("landmark " + lm.name + " has mirror index out of range");
    }
    if (landmarks_[lm.mirror].mirror != i) {
      throw SchemaError("mirror pairing of " + lm.name + " is not symmetric");
    }
    for (int j = 0; j < i; ++j) {
      if (landmarks_[j].name == lm.name) throw SchemaError("duplicate landmark " + lm.name);
    }
  }
  for (std::size_t p = 0; p < part_sizes.size(); ++p) {
    if (part_sizes[p] == 0) throw SchemaError("part " + part_names_[p] + " has no landmarks");
  }
}

std::optional<int> LandmarkSchema::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i) {
    if (landmarks_[i].name == name) return i;
  }
  return std::nullopt;
}

std::optional<int> LandmarkSchema::part_index(const std::string& name) const {
  for (int i = 0; i < part_count(); ++i) {
    if (part_names_[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<std::vector<int>> LandmarkSchema::parts() const {
  std::vector<std::vector<int>> out(part_names_.size());
  for (int i = 0; i < size(); ++i) out[landmarks_[i].part].push_back(i);
  return out;
}

std::vector<int> LandmarkSchema::distinct_ids() const {
  std::vector<int> out;
  for (int i = 0; i < size(); ++i) {
    if (landmarks_[i].distinct) out.push_back(i);
  }
  return out;
}

std::vector<int> LandmarkSchema::mirror_map() const {
  std::vector<int> out(landmarks_.size());
  for (int i = 0; i < size(); ++i) out[i] = landmarks_[i].mirror;
  return out;
}

// Text format, one directive per line, '#' starts a comment:
//   part <id> <name>
//   landmark <name> <part id> <distinct 0|1> <mirror index>
LandmarkSchema parse_schema(std::istream& in) {
  std::vector<std::pair<int, std::string>> parts;
  std::vector<LandmarkInfo> landmarks;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string keyword;
    if (!(ls >> keyword)) continue;
    if (keyword == "part") {
      int id;
      std::string name;
      if (!(ls >> id >> name)) throw ParseError("malformed part directive", line_number);
      parts.emplace_back(id, name);
    } else if (keyword == "landmark") {
      LandmarkInfo lm;
      int distinct;
      if (!(ls >> lm.name >> lm.part >> distinct >> lm.mirror) || (distinct != 0 && distinct != 1)) {
        throw ParseError("malformed landmark directive", line_number);
      }
      lm.distinct = distinct == 1;
      landmarks.push_back(std::move(lm));
    } else {
      throw ParseError("unknown directive '" + keyword + "'", line_number);
    }
  }
  std::sort(parts.begin(), parts.end());
  std::vector<std::string> part_names;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].first != static_cast<int>(i)) throw SchemaError("part ids must be 0..P-1");
    part_names.push_back(parts[i].second);
  }
  return LandmarkSchema(std::move(part_names), std::move(landmarks));
}

LandmarkSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open schema " + path.string());
  return parse_schema(in);
}

std::string format_schema(const LandmarkSchema& schema) {
  std::ostringstream out;
  out << "# part <id> <name>\n";
  for (int p = 0; p < schema.part_count(); ++p) {
    out << "part " << p << ' ' << schema.part_names()[p] << '\n';
  }
  out << "# landmark <name> <part> <distinct> <mirror>\n";
  for (const auto& lm : schema.landmarks()) {
    out << "landmark " << lm.name << ' ' << lm.part << ' ' << (lm.distinct ? 1 : 0) << ' '
        << lm.mirror << '\n';
  }
  return out.str();
}

// --------------------------------------------------------------------------
// Annotation records

namespace {

json shape_points(const Shape& s) {
  json coords = json::array();
  for (int l = 0; l < s.size(); ++l) {
    coords.push_back({s.coords[l].x, s.coords[l].y, s.visibility[l]});
  }
  return coords;
}

}  // namespace

Sample parse_record(const std::string& line, const LandmarkSchema& schema, int line_number) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), line_number);
  }
  Sample sample;
  try {
    sample.image_ref = rec.at("image").get<std::string>();
    const auto& bbox = rec.at("bbox");
    if (!bbox.is_array() || bbox.size() != 4) throw ParseError("bbox must have 4 numbers", line_number);
    sample.bbox = {bbox[0].get<double>(), bbox[1].get<double>(), bbox[2].get<double>(),
                   bbox[3].get<double>()};
    const int declared = rec.at("L").get<int>();
    if (declared != schema.size()) {
      throw SchemaError("line " + std::to_string(line_number) + ": record has L=" +
                        std::to_string(declared) + " but schema has " +
                        std::to_string(schema.size()));
    }
    Shape gt(schema.size());
    std::fill(gt.annotated.begin(), gt.annotated.end(), 0);
    std::vector<uint8_t> seen(schema.size(), 0);
    for (const auto& lm : rec.at("landmarks")) {
      const auto name = lm.at("name").get<std::string>();
      auto idx = schema.index_of(name);
      if (!idx) {
        throw SchemaError("line " + std::to_string(line_number) + ": unknown landmark " + name);
      }
      if (seen[*idx]) throw ParseError("duplicate landmark " + name, line_number);
      seen[*idx] = 1;
      const int annotated = lm.value("annotated", 1);
      if (annotated != 0 && annotated != 1) throw ParseError("annotated must be 0 or 1", line_number);
      gt.annotated[*idx] = static_cast<uint8_t>(annotated);
      if (annotated) {
        gt.coords[*idx] = {lm.at("x").get<double>(), lm.at("y").get<double>()};
        gt.visibility[*idx] = lm.value("visible", 1.0);
      } else {
        gt.coords[*idx] = {0.0, 0.0};
        gt.visibility[*idx] = lm.value("visible", 1.0);
      }
    }
    sample.ground_truth = std::move(gt);
    if (auto it = rec.find("initial"); it != rec.end()) {
      Shape init(schema.size());
      if (!it->is_array() || static_cast<int>(it->size()) != schema.size()) {
        throw SchemaError("line " + std::to_string(line_number) + ": initial shape has wrong length");
      }
      for (int l = 0; l < schema.size(); ++l) {
        const auto& p = (*it)[l];
        init.coords[l] = {p.at(0).get<double>(), p.at(1).get<double>()};
        init.visibility[l] = p.at(2).get<double>();
      }
      sample.initial = std::move(init);
    }
  } catch (const json::exception& e) {
    throw ParseError(e.what(), line_number);
  }
  try {
    sample.validate();
  } catch (const SchemaError& e) {
    throw ParseError(e.what(), line_number);
  }
  return sample;
}

std::string format_record(const Sample& sample, const LandmarkSchema& schema) {
  if (sample.landmark_count() != schema.size()) {
    throw SchemaError("sample landmark count does not match schema");
  }
  json rec;
  rec["image"] = sample.image_ref;
  rec["bbox"] = {sample.bbox.x, sample.bbox.y, sample.bbox.width, sample.bbox.height};
  rec["L"] = schema.size();
  json landmarks = json::array();
  const Shape& gt = sample.ground_truth;
  for (int l = 0; l < schema.size(); ++l) {
    landmarks.push_back({{"name", schema[l].name},
                         {"x", gt.coords[l].x},
                         {"y", gt.coords[l].y},
                         {"visible", gt.visibility[l]},
                         {"annotated", static_cast<int>(gt.annotated[l])}});
  }
  rec["landmarks"] = std::move(landmarks);
  if (sample.initial) rec["initial"] = shape_points(*sample.initial);
  return rec.dump();
}

Dataset parse_dataset(std::istream& in, const LandmarkSchema& schema) {
  Dataset ds;
  ds.schema = schema;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ds.samples.push_back(parse_record(line, schema, line_number));
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path, const LandmarkSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return parse_dataset(in, schema);
}

std::string format_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset.samples) {
    out += format_record(s, dataset.schema);
    out += '\n';
  }
  return out;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write dataset " + path.string());
  out << format_dataset(dataset);
  if (!out) throw IoError("write failed for " + path.string());
}

std::pair<Dataset, Dataset> split_train_val(const Dataset& dataset, double val_fraction,
                                            uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
    throw std::invalid_argument("val_fraction must lie in (0,1)");
  }
  if (dataset.size() < 2) throw DataError("need at least 2 samples to split");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, {0x5b11u}));
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_val =
      static_cast<std::size_t>(std::floor(static_cast<double>(dataset.size()) * val_fraction + 1e-9));
  Dataset train, val;
  train.schema = val.schema = dataset.schema;
  for (std::size_t i = 0; i < order.size(); ++i) {
    (i < n_val ? val : train).samples.push_back(dataset.samples[order[i]]);
  }
  return {std::move(train), std::move(val)};
}

}  // namespace ertalign
