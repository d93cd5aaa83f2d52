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

#include "ertalign/features.h"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ertalign/error.h"
#include "ertalign/random.h"

namespace ertalign {

void FreakPattern::validate() const {
  if (offsets.size() < 2) throw SchemaError("pattern needs at least two probes");
  if (rings.size() != offsets.size()) throw SchemaError("pattern ring ids disagree with offsets");
  for (const auto& o : offsets) {
    if (std::hypot(o.x, o.y) > base_diameter / 2.0 + 1e-9) {
      throw SchemaError("pattern probe lies outside the base diameter");
    }
  }
}

FreakPattern standard_freak_pattern(double base_diameter) {
  // Ring radii relative to the outermost ring (FREAK's bigR = 2/3,
  // smallR = 2/24, unit = (bigR - smallR) / 21).
  constexpr double kBig = 2.0 / 3.0, kSmall = 2.0 / 24.0;
  constexpr double kUnit = (kBig - kSmall) / 21.0;
  const double radii[6] = {kBig, kBig - 6 * kUnit, kBig - 8 * kUnit,
                           kBig - 10 * kUnit, kBig - 12 * kUnit, kSmall};
  constexpr int kPointsPerRing = 7;
  FreakPattern p;
  p.base_diameter = base_diameter;
  const double outer = base_diameter / 2.0;
  for (int ring = 0; ring < 6; ++ring) {
    const double r = outer * radii[ring] / kBig;
    const double phase = (ring % 2) * std::numbers::pi / kPointsPerRing;
    for (int k = 0; k < kPointsPerRing; ++k) {
      const double a = phase + 2.0 * std::numbers::pi * k / kPointsPerRing;
      p.offsets.push_back({r * std::cos(a), r * std::sin(a)});
      p.rings.push_back(ring + 1);
    }
  }
  p.offsets.push_back({0.0, 0.0});
  p.rings.push_back(0);
  return p;
}

FreakPattern parse_pattern(std::istream& in) {
  FreakPattern p;
  std::string line;
  int line_number = 0;
  bool has_diameter = false;
  while (std::getline(in, line)) {
    ++line_number;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first == "diameter") {
      if (!(ls >> p.base_diameter) || !(p.base_diameter > 0.0)) {
        throw ParseError("malformed diameter", line_number);
      }
      has_diameter = true;
      continue;
    }
    int ring;
    Point2 o;
    try {
      ring = std::stoi(first);
    } catch (const std::exception&) {
      throw ParseError("expected '<ring> <dx> <dy>'", line_number);
    }
    if (!(ls >> o.x >> o.y)) throw ParseError("expected '<ring> <dx> <dy>'", line_number);
    p.rings.push_back(ring);
    p.offsets.push_back(o);
  }
  if (!has_diameter) {
    double r = 0.0;
    for (const auto& o : p.offsets) r = std::max(r, std::hypot(o.x, o.y));
    p.base_diameter = 2.0 * r;
  }
  p.validate();
  return p;
}

FreakPattern load_pattern(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pattern " + path.string());
  return parse_pattern(in);
}

std::string format_pattern(const FreakPattern& pattern) {
  std::ostringstream out;
  out.precision(17);
  out << "diameter " << pattern.base_diameter << '\n';
  out << "# <ring> <dx> <dy>\n";
  for (int i = 0; i < pattern.size(); ++i) {
    out << pattern.rings[i] << ' ' << pattern.offsets[i].x << ' ' << pattern.offsets[i].y << '\n';
  }
  return out.str();
}

double feature_value(const MapSource& maps, std::span<const Point2> coords,
                     const SplitParams& theta, const FreakPattern& pattern, double stage_scale,
                     FeatureMode mode) {
  const Point2 anchor = coords[theta.landmark];
  const double a = probe_value(maps, mode, theta.landmark,
                               probe_pixel(anchor, pattern.offsets[theta.p1], stage_scale));
  const double b = probe_value(maps, mode, theta.landmark,
                               probe_pixel(anchor, pattern.offsets[theta.p2], stage_scale));
  return a - b;
}

std::vector<SplitParams> gen_candidates(int count, std::span<const int> part_landmarks,
                                        int pattern_size, std::pair<double, double> tau_range,
                                        uint64_t seed) {
  if (count < 1) throw std::invalid_argument("candidate count must be positive");
  if (part_landmarks.empty()) throw std::invalid_argument("part has no landmarks");
  if (pattern_size < 2) throw std::invalid_argument("pattern needs at least two probes");
  Rng rng(seed);
  std::uniform_int_distribution<int> pick_landmark(0, static_cast<int>(part_landmarks.size()) - 1);
  std::uniform_int_distribution<int> pick_first(0, pattern_size - 1);
  std::uniform_int_distribution<int> pick_second(0, pattern_size - 2);
  std::uniform_real_distribution<double> pick_tau(tau_range.first, tau_range.second);
  std::vector<SplitParams> out(count);
  for (auto& c : out) {
    c.landmark = part_landmarks[pick_landmark(rng)];
    c.p1 = pick_first(rng);
    c.p2 = pick_second(rng);
    if (c.p2 >= c.p1) ++c.p2;
    c.tau = pick_tau(rng);
  }
  return out;
}

double stage_scale(int stage_index, int total_stages, double floor) {
  if (total_stages < 1 || stage_index < 0 || stage_index >= total_stages) {
    throw std::invalid_argument("stage index out of range");
  }
  if (total_stages == 1) return 1.0;
  return 1.0 - (1.0 - floor) * static_cast<double>(stage_index) / (total_stages - 1);
}

std::pair<double, double> default_tau_range(FeatureMode mode) {
  return mode == FeatureMode::kGrayscale ? std::pair{-32.0, 32.0} : std::pair{-0.3, 0.3};
}

FeatureRow extract_features(const MapSource& maps, std::span<const Point2> coords,
                            const FreakPattern& pattern, double stage_scale, FeatureMode mode) {
  FeatureRow row;
  row.pattern_size = pattern.size();
  row.values.resize(coords.size() * pattern.offsets.size());
  std::size_t k = 0;
  for (std::size_t l = 0; l < coords.size(); ++l) {
    for (const auto& offset : pattern.offsets) {
      row.values[k++] = static_cast<float>(probe_value(
          maps, mode, static_cast<int>(l), probe_pixel(coords[l], offset, stage_scale)));
    }
  }
  return row;
}

}  // namespace ertalign
