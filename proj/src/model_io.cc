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

#include "ertalign/model_io.h"

#include <zlib.h>

#include <json.hpp>
#include <sstream>

#include "ertalign/binary_io.h"
#include "ertalign/error.h"

namespace ertalign {

namespace {

using json = nlohmann::json;

constexpr std::string_view kMagic = "ERTM";

uint32_t checksum(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in pieces.
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const std::size_t piece = std::min<std::size_t>(bytes.size() - offset, 1u << 30);
    crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data() + offset),
                static_cast<uInt>(piece));
    offset += piece;
  }
  return static_cast<uint32_t>(crc);
}

json config_json(const CascadeModel& m) {
  const TrainConfig& c = m.config;
  const auto tau = c.effective_tau_range();
  return json{
      {"T", c.max_stages},
      {"K1", c.coarse_trees},
      {"K2", c.fine_trees},
      {"depth", c.depth},
      {"candidates", c.candidates},
      {"nu", c.shrinkage},
      {"eta", c.subsample},
      {"early_stopping", c.early_stopping},
      {"early_stop_delta", c.early_stop_delta},
      {"coarse_to_fine", c.coarse_to_fine},
      {"features", to_string(c.feature_mode)},
      {"scale_floor", c.scale_floor},
      {"tau_min", tau.first},
      {"tau_max", tau.second},
      {"seed", c.seed},
      {"init", to_string(m.init_mode)},
      {"Z", m.robust.iterations},
      {"subset_size", m.robust.subset_size},
      {"smoothing_sigma", m.smoothing_sigma},
      {"focal", m.camera.focal},
      {"map_width", m.map_width},
      {"map_height", m.map_height},
  };
}

void write_shape(BinaryWriter& w, const Shape& s) {
  w.u32(static_cast<uint32_t>(s.size()));
  for (int l = 0; l < s.size(); ++l) {
    w.f64(s.coords[l].x);
    w.f64(s.coords[l].y);
    w.f64(s.visibility[l]);
    w.u32(s.annotated[l]);
  }
}

Shape read_shape(BinaryReader& r) {
  Shape s(static_cast<int>(r.u32()));
  for (int l = 0; l < s.size(); ++l) {
    s.coords[l].x = r.f64();
    s.coords[l].y = r.f64();
    s.visibility[l] = r.f64();
    s.annotated[l] = static_cast<uint8_t>(r.u32());
  }
  return s;
}

void write_tree(BinaryWriter& w, const RegressionTree& t) {
  w.u32(static_cast<uint32_t>(t.nodes.size()));
  for (const auto& n : t.nodes) {
    w.i32(n.left);
    w.i32(n.right);
    w.i32(n.leaf);
    w.f64(n.split.tau);
    w.i32(n.split.p1);
    w.i32(n.split.p2);
    w.i32(n.split.landmark);
  }
  w.u32(static_cast<uint32_t>(t.leaves.size()));
  for (const auto& leaf : t.leaves) {
    w.u32(static_cast<uint32_t>(leaf.visibility.size()));
    for (double v : leaf.residual) w.f64(v);
    for (double v : leaf.visibility) w.f64(v);
  }
}

RegressionTree read_tree(BinaryReader& r, int part_size, int landmarks, int pattern_size) {
  RegressionTree t;
  const uint32_t nodes = r.u32();
  if (nodes == 0 || nodes > (1u << 20)) throw FormatError("implausible tree node count");
  t.nodes.resize(nodes);
  for (auto& n : t.nodes) {
    n.left = r.i32();
    n.right = r.i32();
    n.leaf = r.i32();
    n.split.tau = r.f64();
    n.split.p1 = r.i32();
    n.split.p2 = r.i32();
    n.split.landmark = r.i32();
  }
  const uint32_t leaves = r.u32();
  if (leaves > nodes) throw FormatError("more leaves than nodes");
  t.leaves.resize(leaves);
  for (auto& leaf : t.leaves) {
    if (static_cast<int>(r.u32()) != part_size) throw FormatError("leaf size mismatch");
    leaf.residual.resize(2 * part_size);
    leaf.visibility.resize(part_size);
    for (double& v : leaf.residual) v = r.f64();
    for (double& v : leaf.visibility) v = r.f64();
  }
  const int node_count = static_cast<int>(nodes);
  for (int i = 0; i < node_count; ++i) {
    const auto& n = t.nodes[i];
    if (n.is_leaf()) {
      if (n.leaf >= static_cast<int>(leaves)) throw FormatError("leaf index out of range");
      continue;
    }
    // Children always follow their parent, which also rules out cycles.
    if (n.left <= i || n.right <= i || n.left >= node_count || n.right >= node_count) {
      throw FormatError("tree child index out of range");
    }
    if (n.split.landmark < 0 || n.split.landmark >= landmarks || n.split.p1 < 0 ||
        n.split.p2 < 0 || n.split.p1 >= pattern_size || n.split.p2 >= pattern_size) {
      throw FormatError("split parameters out of range");
    }
  }
  return t;
}

}  // namespace

std::string describe_config(const CascadeModel& model) { return config_json(model).dump(); }

std::string encode_model(const CascadeModel& model) {
  json header{
      {"config", config_json(model)},
      {"schema", format_schema(model.schema)},
      {"pattern", format_pattern(model.pattern)},
      {"init_seed", model.init_seed},
      {"camera", {model.camera.focal, model.camera.cx, model.camera.cy}},
      {"has_model3d", model.model3d.has_value()},
  };
  const std::string header_text = header.dump();

  BinaryWriter w;
  w.bytes(kMagic);
  w.u32(kModelVersion);
  w.str(header_text);

  // Reals from the header that must survive bit-exactly are repeated here.
  w.f64(model.camera.focal);
  w.f64(model.camera.cx);
  w.f64(model.camera.cy);
  w.f64(model.smoothing_sigma);
  w.f64(model.config.shrinkage);
  write_shape(w, model.mean_shape);
  if (model.model3d) {
    const Model3D& m = *model.model3d;
    w.u32(static_cast<uint32_t>(m.size()));
    for (int i = 0; i < m.size(); ++i) {
      w.str(m.names[i]);
      for (int k = 0; k < 3; ++k) w.f64(m.points[i][k]);
      for (int k = 0; k < 3; ++k) w.f64(m.normals[i][k]);
    }
    w.u32(static_cast<uint32_t>(m.distinct_ids.size()));
    for (int id : m.distinct_ids) w.i32(id);
  }

  w.u32(static_cast<uint32_t>(model.stages.size()));
  for (const auto& stage : model.stages) {
    w.f64(stage.shrinkage);
    w.f64(stage.scale);
    w.u32(stage.fine ? 1 : 0);
    w.u32(static_cast<uint32_t>(stage.parts.size()));
    for (const auto& part : stage.parts) {
      w.u32(static_cast<uint32_t>(part.landmarks.size()));
      for (int l : part.landmarks) w.i32(l);
      w.u32(static_cast<uint32_t>(part.trees.size()));
      for (const auto& tree : part.trees) write_tree(w, tree);
    }
  }
  const uint32_t crc = checksum(w.buffer());
  w.u32(crc);
  return w.take();
}

CascadeModel decode_model(std::string_view bytes) {
  if (bytes.size() < kMagic.size() + 8 || bytes.substr(0, kMagic.size()) != kMagic) {
    throw FormatError("not a model file (bad magic)");
  }
  const std::string_view body = bytes.substr(0, bytes.size() - 4);
  BinaryReader tail(bytes.substr(bytes.size() - 4));
  if (tail.u32() != checksum(body)) throw FormatError("model checksum mismatch");

  BinaryReader r(body);
  r.bytes(kMagic.size());
  const uint32_t version = r.u32();
  if (version != kModelVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }
  json header;
  try {
    header = json::parse(r.str());
  } catch (const json::exception& e) {
    throw FormatError(std::string("corrupt model header: ") + e.what());
  }

  CascadeModel m;
  try {
    std::istringstream schema_text(header.at("schema").get<std::string>());
    m.schema = parse_schema(schema_text);
    std::istringstream pattern_text(header.at("pattern").get<std::string>());
    m.pattern = parse_pattern(pattern_text);
    const json& c = header.at("config");
    TrainConfig& t = m.config;
    t.max_stages = c.at("T");
    t.coarse_trees = c.at("K1");
    t.fine_trees = c.at("K2");
    t.depth = c.at("depth");
    t.candidates = c.at("candidates");
    t.subsample = c.at("eta");
    t.early_stopping = c.at("early_stopping");
    t.early_stop_delta = c.at("early_stop_delta");
    t.coarse_to_fine = c.at("coarse_to_fine");
    t.feature_mode = parse_feature_mode(c.at("features"));
    t.scale_floor = c.at("scale_floor");
    t.tau_range = std::pair<double, double>{c.at("tau_min"), c.at("tau_max")};
    t.seed = c.at("seed");
    m.feature_mode = t.feature_mode;
    m.init_mode = parse_init_mode(c.at("init"));
    m.robust.iterations = c.at("Z");
    m.robust.subset_size = c.at("subset_size");
    m.map_width = c.at("map_width");
    m.map_height = c.at("map_height");
    m.init_seed = header.at("init_seed");
  } catch (const json::exception& e) {
    throw FormatError(std::string("incomplete model header: ") + e.what());
  }

  m.camera.focal = r.f64();
  m.camera.cx = r.f64();
  m.camera.cy = r.f64();
  m.smoothing_sigma = r.f64();
  m.config.shrinkage = r.f64();
  m.mean_shape = read_shape(r);
  if (m.mean_shape.size() != m.schema.size()) throw FormatError("mean shape size mismatch");
  if (header.value("has_model3d", false)) {
    Model3D model;
    const uint32_t n = r.u32();
    if (static_cast<int>(n) != m.schema.size()) throw FormatError("3D model size mismatch");
    for (uint32_t i = 0; i < n; ++i) {
      model.names.push_back(r.str());
      Eigen::Vector3d p, q;
      for (int k = 0; k < 3; ++k) p[k] = r.f64();
      for (int k = 0; k < 3; ++k) q[k] = r.f64();
      model.points.push_back(p);
      model.normals.push_back(q);
    }
    const uint32_t d = r.u32();
    if (d > n) throw FormatError("too many distinct ids");
    for (uint32_t i = 0; i < d; ++i) model.distinct_ids.push_back(r.i32());
    try {
      model.validate();
    } catch (const SchemaError& e) {
      throw FormatError(std::string("invalid embedded 3D model: ") + e.what());
    }
    m.model3d = std::move(model);
  }

  const int landmarks = m.schema.size();
  const uint32_t stages = r.u32();
  if (stages > 4096) throw FormatError("implausible stage count");
  for (uint32_t s = 0; s < stages; ++s) {
    PartsStage stage;
    stage.shrinkage = r.f64();
    stage.scale = r.f64();
    stage.fine = r.u32() != 0;
    const uint32_t parts = r.u32();
    if (parts == 0 || static_cast<int>(parts) > landmarks) throw FormatError("bad part count");
    for (uint32_t p = 0; p < parts; ++p) {
      PartRegressor part;
      const uint32_t size = r.u32();
      if (size == 0 || static_cast<int>(size) > landmarks) throw FormatError("bad part size");
      for (uint32_t j = 0; j < size; ++j) {
        const int l = r.i32();
        if (l < 0 || l >= landmarks) throw FormatError("part landmark out of range");
        part.landmarks.push_back(l);
      }
      const uint32_t trees = r.u32();
      if (trees > (1u << 16)) throw FormatError("implausible tree count");
      for (uint32_t k = 0; k < trees; ++k) {
        part.trees.push_back(
            read_tree(r, static_cast<int>(size), landmarks, m.pattern.size()));
      }
      stage.parts.push_back(std::move(part));
    }
    const auto k = stage.parts.front().trees.size();
    for (const auto& part : stage.parts) {
      if (part.trees.size() != k) throw FormatError("parts disagree on tree count");
    }
    m.stages.push_back(std::move(stage));
  }
  if (r.remaining() != 0) throw FormatError("trailing bytes after model body");
  return m;
}

void save_model(const CascadeModel& model, const std::filesystem::path& path) {
  write_file(path, encode_model(model));
}

CascadeModel load_model(const std::filesystem::path& path) { return decode_model(read_file(path)); }

}  // namespace ertalign
