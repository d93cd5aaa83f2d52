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

// Shape-indexed pixel-pair features read from probability maps (or a single
// grayscale grid) at offsets drawn from a retina-like concentric pattern.

#ifndef ERTALIGN_FEATURES_H_
#define ERTALIGN_FEATURES_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ertalign/geometry.h"
#include "ertalign/heatmap.h"

namespace ertalign {

enum class FeatureMode { kHeatmap, kGrayscale };

struct FreakPattern {
  std::vector<Point2> offsets;  // pixels at stage scale 1
  std::vector<int> rings;       // ring id per offset; 0 is the centre
  double base_diameter = 32.0;

  int size() const { return static_cast<int>(offsets.size()); }
  void validate() const;
};

// 43 probes: centre plus 6 rings of 7, alternate rings rotated by half a
// step, radii following the FREAK receptive-field layout.
FreakPattern standard_freak_pattern(double base_diameter = 32.0);

// Text format: optional "diameter <px>" line, then "<ring> <dx> <dy>" lines.
FreakPattern parse_pattern(std::istream& in);
FreakPattern load_pattern(const std::filesystem::path& path);
std::string format_pattern(const FreakPattern& pattern);

struct SplitParams {
  double tau = 0.0;
  int p1 = 0;
  int p2 = 1;
  int landmark = 0;

  friend bool operator==(const SplitParams&, const SplitParams&) = default;
};

// Location of probe `p` around landmark position `anchor`.
inline Pixel probe_pixel(Point2 anchor, Point2 offset, double stage_scale) {
  return round_px(Point2{anchor.x + stage_scale * offset.x, anchor.y + stage_scale * offset.y});
}

// Map value at a probe; grayscale mode always reads grid 0.
inline double probe_value(const MapSource& maps, FeatureMode mode, int landmark, Pixel px) {
  return maps.at(mode == FeatureMode::kGrayscale ? 0 : landmark, px.x, px.y);
}

// P^l[p1] - P^l[p2] with probes anchored at coords[theta.landmark].
double feature_value(const MapSource& maps, std::span<const Point2> coords,
                     const SplitParams& theta, const FreakPattern& pattern, double stage_scale,
                     FeatureMode mode = FeatureMode::kHeatmap);

// `count` candidates with the landmark uniform over `part_landmarks`, an
// ordered pair of distinct probes and tau uniform in `tau_range`.
std::vector<SplitParams> gen_candidates(int count, std::span<const int> part_landmarks,
                                        int pattern_size, std::pair<double, double> tau_range,
                                        uint64_t seed);

// Linear pattern-diameter schedule from 1 at stage 0 to `floor` at the last
// stage of the budget.
double stage_scale(int stage_index, int total_stages, double floor = 0.2);

std::pair<double, double> default_tau_range(FeatureMode mode);

// All probe values of one face at a fixed shape: L x pattern_size floats.
// A tree reads features through this table during a stage.
struct FeatureRow {
  std::vector<float> values;
  int pattern_size = 0;

  double at(int landmark, int probe) const {
    return values[static_cast<std::size_t>(landmark) * pattern_size + probe];
  }
  double feature(const SplitParams& theta) const {
    return at(theta.landmark, theta.p1) - at(theta.landmark, theta.p2);
  }
};

FeatureRow extract_features(const MapSource& maps, std::span<const Point2> coords,
                            const FreakPattern& pattern, double stage_scale, FeatureMode mode);

}  // namespace ertalign

#endif  // ERTALIGN_FEATURES_H_
