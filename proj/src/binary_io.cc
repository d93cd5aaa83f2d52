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

#include "ertalign/binary_io.h"

#include <fstream>
#include <sstream>

#include "ertalign/error.h"

namespace ertalign {

void BinaryReader::need(std::size_t n) const {
  if (n > data_.size() - pos_) {
    throw FormatError("truncated data: need " + std::to_string(n) + " bytes at offset " +
                      std::to_string(pos_) + ", have " + std::to_string(data_.size() - pos_));
  }
}

uint32_t BinaryReader::u32() { return read<uint32_t>(); }
uint64_t BinaryReader::u64() { return read<uint64_t>(); }
int32_t BinaryReader::i32() { return read<int32_t>(); }
float BinaryReader::f32() { return read<float>(); }
double BinaryReader::f64() { return read<double>(); }

std::string_view BinaryReader::bytes(std::size_t n) {
  need(n);
  auto out = data_.substr(pos_, n);
  pos_ += n;
  return out;
}

std::string BinaryReader::str() {
  const uint32_t n = u32();
  return std::string(bytes(n));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace ertalign
