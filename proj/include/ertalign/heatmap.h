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

// Per-landmark probability maps in crop coordinates. Everything downstream
// reads maps through MapSource so that dense grids loaded from disk, the
// analytic synthetic blobs and augmented (warped) views are interchangeable.

#ifndef ERTALIGN_HEATMAP_H_
#define ERTALIGN_HEATMAP_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ertalign/geometry.h"
#include "ertalign/shape_data.h"

namespace ertalign {

class MapSource {
 public:
  virtual ~MapSource() = default;

  virtual int landmarks() const = 0;
  virtual int height() const = 0;
  virtual int width() const = 0;
  // Value of map `l` at pixel (x, y); 0 outside the grid.
  virtual float at(int l, int x, int y) const = 0;
  // Row-major-first argmax of map `l`.
  virtual Pixel peak(int l) const;

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width() && y < height(); }
};

// Dense L x H x W grid stored landmark-major, row-major.
class ProbabilityMaps final : public MapSource {
 public:
  ProbabilityMaps() = default;
  ProbabilityMaps(int landmarks, int height, int width, float fill = 0.0f);

  int landmarks() const override { return landmarks_; }
  int height() const override { return height_; }
  int width() const override { return width_; }
  float at(int l, int x, int y) const override {
    if (!in_bounds(x, y)) return 0.0f;
    return data_[index(l, x, y)];
  }

  Pixel peak(int l) const override;

  float& cell(int l, int x, int y) { return data_[index(l, x, y)]; }
  std::span<float> grid(int l) {
    return {data_.data() + static_cast<std::size_t>(l) * height_ * width_,
            static_cast<std::size_t>(height_) * width_};
  }
  std::span<const float> grid(int l) const {
    return {data_.data() + static_cast<std::size_t>(l) * height_ * width_,
            static_cast<std::size_t>(height_) * width_};
  }
  const std::vector<float>& data() const { return data_; }

  // Throws DataError on negative or non-finite values.
  void validate() const;

  friend bool operator==(const ProbabilityMaps& a, const ProbabilityMaps& b) {
    return a.landmarks_ == b.landmarks_ && a.height_ == b.height_ && a.width_ == b.width_ &&
           a.data_ == b.data_;
  }

 private:
  std::size_t index(int l, int x, int y) const {
    return (static_cast<std::size_t>(l) * height_ + y) * width_ + x;
  }

  int landmarks_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

// Separable Gaussian smoothing, kernel truncated at 3 sigma and normalised,
// reflective borders (edge pixel repeated: ...cba|abc...).
ProbabilityMaps smooth(const ProbabilityMaps& maps, double sigma);

std::vector<Pixel> peak_coords(const MapSource& maps);

// Dense copy of any map source.
ProbabilityMaps render(const MapSource& source);

// Binary map file: "PMAP", then version, L, H, W as little-endian uint32,
// then L*H*W little-endian float32 (landmark-major, row-major).
std::string encode_maps(const ProbabilityMaps& maps);
ProbabilityMaps decode_maps(std::string_view bytes);
void write_maps(const ProbabilityMaps& maps, const std::filesystem::path& path);
ProbabilityMaps read_maps(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic CNN surrogate

struct SynthConfig {
  double peak_sigma = 4.0;              // pixels
  double coordinate_noise_sigma = 1.0;  // pixels
  double outlier_rate = 0.0;
  double occluded_dropout = 0.0;
  double floor = 0.0;

  void validate() const;
};

// One unit-peak Gaussian per landmark, evaluated lazily. Values at integer
// pixels are bit-identical to the dense rendering.
class BlobMaps final : public MapSource {
 public:
  struct Blob {
    double cx = 0.0;
    double cy = 0.0;
    bool flat = false;
  };

  BlobMaps(int height, int width, double sigma, double floor, std::vector<Blob> blobs);

  int landmarks() const override { return static_cast<int>(blobs_.size()); }
  int height() const override { return height_; }
  int width() const override { return width_; }
  float at(int l, int x, int y) const override;
  Pixel peak(int l) const override;

  const std::vector<Blob>& blobs() const { return blobs_; }

 private:
  int height_;
  int width_;
  double inv_two_sigma_sq_;
  float floor_;
  std::vector<Blob> blobs_;
};

// Blobs centred on the (crop-frame) ground truth of `gt`, perturbed as
// configured. Deterministic in (gt, cfg, seed).
BlobMaps synthesize_blobs(const Shape& gt, int height, int width, const SynthConfig& cfg,
                          uint64_t seed);
ProbabilityMaps synthesize(const Shape& gt, int height, int width, const SynthConfig& cfg,
                           uint64_t seed);

// Read-only view of another source through an augmentation warp: landmark
// permutation for mirrored samples, nearest-neighbour resampling through the
// inverse warp and zeroed occlusion rectangles.
class WarpedMaps final : public MapSource {
 public:
  WarpedMaps(const MapSource& base, const Warp& warp, std::vector<int> landmark_map,
             std::vector<Rect> occlusions);

  int landmarks() const override { return base_.landmarks(); }
  int height() const override { return base_.height(); }
  int width() const override { return base_.width(); }
  float at(int l, int x, int y) const override;

 private:
  const MapSource& base_;
  Warp warp_;
  std::vector<int> landmark_map_;
  std::vector<Rect> occlusions_;
};

}  // namespace ertalign

#endif  // ERTALIGN_HEATMAP_H_
