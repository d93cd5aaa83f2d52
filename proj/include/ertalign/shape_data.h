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

// Canonical dataset representation: shapes, samples, the landmark schema and
// the newline-delimited annotation format.

#ifndef ERTALIGN_SHAPE_DATA_H_
#define ERTALIGN_SHAPE_DATA_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ertalign/geometry.h"

namespace ertalign {

// Landmark coordinates with per-landmark visibility in [0,1] and a binary
// annotated mask. Unannotated landmarks hold the placeholder (0,0); callers
// must gate on `annotated`, never on the coordinates.
struct Shape {
  std::vector<Point2> coords;
  std::vector<double> visibility;
  std::vector<uint8_t> annotated;

  Shape() = default;
  explicit Shape(int landmarks)
      : coords(landmarks), visibility(landmarks, 1.0), annotated(landmarks, 1) {}

  int size() const { return static_cast<int>(coords.size()); }
  int annotated_count() const;
  // Throws SchemaError when lengths disagree or masks are out of range.
  void validate() const;

  friend bool operator==(const Shape&, const Shape&) = default;
};

struct Sample {
  std::string image_ref;
  Shape ground_truth;
  std::optional<Shape> initial;
  Rect bbox;

  int landmark_count() const { return ground_truth.size(); }
  void validate() const;
};

struct LandmarkInfo {
  std::string name;
  int part = 0;
  bool distinct = false;
  int mirror = 0;  // index of the left/right counterpart (self for midline points)
  friend bool operator==(const LandmarkInfo&, const LandmarkInfo&) = default;
};

class LandmarkSchema {
 public:
  LandmarkSchema() = default;
  LandmarkSchema(std::vector<std::string> part_names, std::vector<LandmarkInfo> landmarks);

  int size() const { return static_cast<int>(landmarks_.size()); }
  int part_count() const { return static_cast<int>(part_names_.size()); }
  const std::vector<LandmarkInfo>& landmarks() const { return landmarks_; }
  const std::vector<std::string>& part_names() const { return part_names_; }
  const LandmarkInfo& operator[](int i) const { return landmarks_.at(i); }

  std::optional<int> index_of(const std::string& name) const;
  std::optional<int> part_index(const std::string& name) const;
  // Landmark indices per part, in ascending order.
  std::vector<std::vector<int>> parts() const;
  std::vector<int> distinct_ids() const;
  std::vector<int> mirror_map() const;

  friend bool operator==(const LandmarkSchema&, const LandmarkSchema&) = default;

 private:
  void validate() const;

  std::vector<std::string> part_names_;
  std::vector<LandmarkInfo> landmarks_;
};

LandmarkSchema parse_schema(std::istream& in);
LandmarkSchema load_schema(const std::filesystem::path& path);
std::string format_schema(const LandmarkSchema& schema);

struct Dataset {
  std::vector<Sample> samples;
  LandmarkSchema schema;

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
};

// One JSON object per line; see README for the field list.
Sample parse_record(const std::string& line, const LandmarkSchema& schema, int line_number);
std::string format_record(const Sample& sample, const LandmarkSchema& schema);

Dataset parse_dataset(std::istream& in, const LandmarkSchema& schema);
Dataset load_dataset(const std::filesystem::path& path, const LandmarkSchema& schema);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);
std::string format_dataset(const Dataset& dataset);

// Shuffles under `seed` and moves floor(N * val_fraction) samples into the
// validation half. Returns {train, validation}.
std::pair<Dataset, Dataset> split_train_val(const Dataset& dataset, double val_fraction,
                                            uint64_t seed);

}  // namespace ertalign

#endif  // ERTALIGN_SHAPE_DATA_H_
