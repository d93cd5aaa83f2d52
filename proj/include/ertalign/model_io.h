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

// Cascade model container.
//
//   "ERTM" | u32 version | u32 header length | JSON header (config echo,
//   schema, pattern, modes) | binary body (mean shape, 3D model, stages) |
//   u32 CRC-32 of everything before it
//
// All numbers are little-endian; every real is stored as a 64-bit float so
// that a loaded model predicts bit-identically to the one that was saved.

#ifndef ERTALIGN_MODEL_IO_H_
#define ERTALIGN_MODEL_IO_H_

#include <filesystem>
#include <string>
#include <string_view>

#include "ertalign/ert_cascade.h"

namespace ertalign {

inline constexpr uint32_t kModelVersion = 1;

std::string encode_model(const CascadeModel& model);
CascadeModel decode_model(std::string_view bytes);

void save_model(const CascadeModel& model, const std::filesystem::path& path);
CascadeModel load_model(const std::filesystem::path& path);

// JSON echo of the training configuration, as written in model headers and
// training logs.
std::string describe_config(const CascadeModel& model);

}  // namespace ertalign

#endif  // ERTALIGN_MODEL_IO_H_
