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

#ifndef ERTALIGN_TESTS_TEST_UTIL_H_
#define ERTALIGN_TESTS_TEST_UTIL_H_

#include <filesystem>
#include <random>
#include <string>

#include "ertalign/pose_init.h"
#include "ertalign/shape_data.h"

namespace ertalign::testing {

inline std::filesystem::path data_file(const std::string& name) {
  return std::filesystem::path(ERTALIGN_TEST_DATA_DIR) / name;
}

inline const LandmarkSchema& face24_schema() {
  static const LandmarkSchema schema = load_schema(data_file("face24.schema"));
  return schema;
}

inline const Model3D& face24_model() {
  static const Model3D model = load_model3d(data_file("face24.model3d"));
  return model;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("ertalign_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace ertalign::testing

#endif  // ERTALIGN_TESTS_TEST_UTIL_H_
