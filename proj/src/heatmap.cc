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

#include "ertalign/heatmap.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ertalign/binary_io.h"
#include "ertalign/error.h"
#include "ertalign/random.h"

namespace ertalign {

namespace {

constexpr char kMapMagic[4] = {'P', 'M', 'A', 'P'};
constexpr uint32_t kMapVersion = 1;

// Symmetric reflection (edge sample repeated) valid for any offset.
int reflect(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

Pixel MapSource::peak(int l) const {
  Pixel best{0, 0};
  float best_value = at(l, 0, 0);
  for (int y = 0; y < height(); ++y) {
    for (int x = 0; x < width(); ++x) {
      const float v = at(l, x, y);
      if (v > best_value) {
        best_value = v;
        best = {x, y};
      }
    }
  }
  return best;
}

Pixel ProbabilityMaps::peak(int l) const {
  const auto g = grid(l);
  if (g.empty()) return {0, 0};
  // max_element keeps the first maximum, matching the row-major scan.
  const auto at = std::max_element(g.begin(), g.end()) - g.begin();
  return {static_cast<int>(at % width_), static_cast<int>(at / width_)};
}

ProbabilityMaps::ProbabilityMaps(int landmarks, int height, int width, float fill)
    : landmarks_(landmarks), height_(height), width_(width) {
  if (landmarks <= 0 || height <= 0 || width <= 0) {
    throw std::invalid_argument("map dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(landmarks) * height * width, fill);
}

void ProbabilityMaps::validate() const {
  for (float v : data_) {
    if (!std::isfinite(v)) throw DataError("probability map contains a non-finite value");
    if (v < 0.0f) throw DataError("probability map contains a negative value");
  }
}

ProbabilityMaps smooth(const ProbabilityMaps& maps, double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("smoothing sigma must be positive");
  for (float v : maps.data()) {
    if (!std::isfinite(v)) throw DataError("cannot smooth a map with non-finite values");
  }
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int h = maps.height(), w = maps.width();
  ProbabilityMaps out(maps.landmarks(), h, w);
  std::vector<double> tmp(static_cast<std::size_t>(h) * w);
  for (int l = 0; l < maps.landmarks(); ++l) {
    auto src = maps.grid(l);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[k + radius] * src[static_cast<std::size_t>(y) * w + reflect(x + k, w)];
        }
        tmp[static_cast<std::size_t>(y) * w + x] = acc;
      }
    }
    auto dst = out.grid(l);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += kernel[k + radius] * tmp[static_cast<std::size_t>(reflect(y + k, h)) * w + x];
        }
        dst[static_cast<std::size_t>(y) * w + x] = static_cast<float>(std::max(0.0, acc));
      }
    }
  }
  return out;
}

std::vector<Pixel> peak_coords(const MapSource& maps) {
  std::vector<Pixel> out(maps.landmarks());
  for (int l = 0; l < maps.landmarks(); ++l) out[l] = maps.peak(l);
  return out;
}

ProbabilityMaps render(const MapSource& source) {
  ProbabilityMaps out(source.landmarks(), source.height(), source.width());
  for (int l = 0; l < source.landmarks(); ++l) {
    for (int y = 0; y < source.height(); ++y) {
      for (int x = 0; x < source.width(); ++x) out.cell(l, x, y) = source.at(l, x, y);
    }
  }
  return out;
}

std::string encode_maps(const ProbabilityMaps& maps) {
  BinaryWriter w;
  w.raw(kMapMagic, sizeof kMapMagic);
  w.u32(kMapVersion);
  w.u32(static_cast<uint32_t>(maps.landmarks()));
  w.u32(static_cast<uint32_t>(maps.height()));
  w.u32(static_cast<uint32_t>(maps.width()));
  w.raw(maps.data().data(), maps.data().size() * sizeof(float));
  return w.take();
}

ProbabilityMaps decode_maps(std::string_view bytes) {
  BinaryReader r(bytes);
  if (r.remaining() < 4 || r.bytes(4) != std::string_view(kMapMagic, 4)) {
    throw FormatError("map file: bad magic");
  }
  const uint32_t version = r.u32();
  if (version != kMapVersion) throw FormatError("map file: unsupported version " + std::to_string(version));
  const uint32_t l = r.u32(), h = r.u32(), w = r.u32();
  if (l == 0 || h == 0 || w == 0 || l > 4096 || h > 16384 || w > 16384) {
    throw FormatError("map file: invalid dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(l) * h * w;
  if (r.remaining() != count * sizeof(float)) {
    throw FormatError("map file: payload size " + std::to_string(r.remaining()) +
                      " does not match header " + std::to_string(count * sizeof(float)));
  }
  ProbabilityMaps maps(static_cast<int>(l), static_cast<int>(h), static_cast<int>(w));
  auto payload = r.bytes(count * sizeof(float));
  for (uint32_t i = 0; i < l; ++i) {
    auto g = maps.grid(static_cast<int>(i));
    std::memcpy(g.data(), payload.data() + static_cast<std::size_t>(i) * h * w * sizeof(float),
                g.size_bytes());
  }
  return maps;
}

void write_maps(const ProbabilityMaps& maps, const std::filesystem::path& path) {
  write_file(path, encode_maps(maps));
}

ProbabilityMaps read_maps(const std::filesystem::path& path) {
  return decode_maps(read_file(path));
}

// ---------------------------------------------------------------------------

void SynthConfig::validate() const {
  if (!(peak_sigma > 0.0)) throw std::invalid_argument("peak_sigma must be positive");
  if (!(coordinate_noise_sigma >= 0.0)) {
    throw std::invalid_argument("coordinate_noise_sigma must be non-negative");
  }
  if (!(outlier_rate >= 0.0 && outlier_rate <= 1.0)) {
    throw std::invalid_argument("outlier_rate must lie in [0,1]");
  }
  if (!(occluded_dropout >= 0.0 && occluded_dropout <= 1.0)) {
    throw std::invalid_argument("occluded_dropout must lie in [0,1]");
  }
  if (!(floor >= 0.0 && floor < 1.0)) throw std::invalid_argument("floor must lie in [0,1)");
}

BlobMaps::BlobMaps(int height, int width, double sigma, double floor, std::vector<Blob> blobs)
    : height_(height),
      width_(width),
      inv_two_sigma_sq_(1.0 / (2.0 * sigma * sigma)),
      floor_(static_cast<float>(floor)),
      blobs_(std::move(blobs)) {}

float BlobMaps::at(int l, int x, int y) const {
  if (!in_bounds(x, y)) return 0.0f;
  const Blob& b = blobs_[l];
  if (b.flat) return floor_;
  const double dx = x - b.cx, dy = y - b.cy;
  const auto v = static_cast<float>(std::exp(-(dx * dx + dy * dy) * inv_two_sigma_sq_));
  return std::max(floor_, v);
}

Pixel BlobMaps::peak(int l) const {
  const Blob& b = blobs_[l];
  if (b.flat) return {0, 0};
  // Values fall monotonically with distance from the centre, so the maximum
  // sits next to the clamped nearest pixel.
  const int cx = std::clamp(round_px(std::clamp(b.cx, -1e6, 1e6)), 0, width_ - 1);
  const int cy = std::clamp(round_px(std::clamp(b.cy, -1e6, 1e6)), 0, height_ - 1);
  Pixel best{0, 0};
  float best_value = -1.0f;
  for (int y = std::max(0, cy - 2); y <= std::min(height_ - 1, cy + 2); ++y) {
    for (int x = std::max(0, cx - 2); x <= std::min(width_ - 1, cx + 2); ++x) {
      const float v = at(l, x, y);
      if (v > best_value) {
        best_value = v;
        best = {x, y};
      }
    }
  }
  if (best_value <= floor_) return {0, 0};
  return best;
}

BlobMaps synthesize_blobs(const Shape& gt, int height, int width, const SynthConfig& cfg,
                          uint64_t seed) {
  cfg.validate();
  Rng rng(mix_seed(seed, {0xb10bu}));
  std::vector<BlobMaps::Blob> blobs(gt.size());
  for (int l = 0; l < gt.size(); ++l) {
    // Fixed number of draws per landmark keeps streams aligned across configs.
    const double nx = gaussian(rng, 1.0);
    const double ny = gaussian(rng, 1.0);
    const double u_outlier = uniform(rng, 0.0, 1.0);
    const double ox = uniform(rng, 0.0, width);
    const double oy = uniform(rng, 0.0, height);
    const double u_drop = uniform(rng, 0.0, 1.0);
    auto& b = blobs[l];
    if (!gt.annotated[l]) {
      b.flat = true;
      continue;
    }
    b.cx = gt.coords[l].x + cfg.coordinate_noise_sigma * nx;
    b.cy = gt.coords[l].y + cfg.coordinate_noise_sigma * ny;
    if (u_outlier < cfg.outlier_rate) {
      b.cx = ox;
      b.cy = oy;
    }
    if (gt.visibility[l] < 0.5 && u_drop < cfg.occluded_dropout) b.flat = true;
  }
  return BlobMaps(height, width, cfg.peak_sigma, cfg.floor, std::move(blobs));
}

ProbabilityMaps synthesize(const Shape& gt, int height, int width, const SynthConfig& cfg,
                           uint64_t seed) {
  return render(synthesize_blobs(gt, height, width, cfg, seed));
}

// ---------------------------------------------------------------------------

WarpedMaps::WarpedMaps(const MapSource& base, const Warp& warp, std::vector<int> landmark_map,
                       std::vector<Rect> occlusions)
    : base_(base),
      warp_(warp),
      landmark_map_(std::move(landmark_map)),
      occlusions_(std::move(occlusions)) {}

float WarpedMaps::at(int l, int x, int y) const {
  if (!in_bounds(x, y)) return 0.0f;
  const Point2 q{static_cast<double>(x), static_cast<double>(y)};
  for (const auto& r : occlusions_) {
    if (r.contains(q)) return 0.0f;
  }
  const int src_l = landmark_map_.empty() ? l : landmark_map_[l];
  const Pixel p = round_px(warp_.invert(q));
  return base_.at(src_l, p.x, p.y);
}

}  // namespace ertalign
