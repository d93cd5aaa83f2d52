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

#ifndef ERTALIGN_GEOMETRY_H_
#define ERTALIGN_GEOMETRY_H_

#include <cmath>
#include <cstdint>
#include <limits>

namespace ertalign {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Point2 operator*(double s, Point2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Point2 a, Point2 b) = default;
};

inline double distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Pixel {
  int x = 0;
  int y = 0;
  friend bool operator==(Pixel a, Pixel b) = default;
};

// Nearest pixel for a continuous coordinate; halves round up. Coordinates
// that are not finite or do not fit in an int map to a sentinel that every
// grid treats as out of bounds.
inline int round_px(double v) {
  constexpr int kOutside = std::numeric_limits<int>::min();
  if (!std::isfinite(v) || std::fabs(v) > 1e9) return kOutside;
  return static_cast<int>(std::floor(v + 0.5));
}

inline Pixel round_px(Point2 p) { return {round_px(p.x), round_px(p.y)}; }

struct Rect {
  double x = 0.0;
  double y = 0.0;
  double width = 0.0;
  double height = 0.0;

  bool contains(Point2 p) const {
    return p.x >= x && p.x < x + width && p.y >= y && p.y < y + height;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

// Maps image coordinates inside a face bounding box onto the W x H grid of
// the probability maps and back.
struct CropFrame {
  Rect bbox;
  int width = 0;
  int height = 0;

  Point2 to_crop(Point2 p) const {
    return {(p.x - bbox.x) * width / bbox.width, (p.y - bbox.y) * height / bbox.height};
  }
  Point2 to_image(Point2 p) const {
    return {p.x * bbox.width / width + bbox.x, p.y * bbox.height / height + bbox.y};
  }
  // Geometric mean of the bbox sides, expressed in crop pixels.
  double crop_height_norm() const { return std::sqrt(double(width) * height); }
};

// In-plane similarity about a fixed centre, optionally preceded by a
// horizontal mirror about the same centre. Used for image-space augmentation
// of coordinates and, through its inverse, of map lookups.
struct Warp {
  bool mirror = false;
  double angle = 0.0;  // radians, counter-clockwise in image axes
  double scale = 1.0;
  Point2 shift;
  Point2 center;

  bool is_identity() const {
    return !mirror && angle == 0.0 && scale == 1.0 && shift.x == 0.0 && shift.y == 0.0;
  }

  Point2 apply(Point2 p) const {
    if (mirror) p.x = 2.0 * center.x - p.x;
    const double c = std::cos(angle), s = std::sin(angle);
    const double dx = p.x - center.x, dy = p.y - center.y;
    return {scale * (c * dx - s * dy) + center.x + shift.x,
            scale * (s * dx + c * dy) + center.y + shift.y};
  }

  Point2 invert(Point2 q) const {
    const double c = std::cos(angle), s = std::sin(angle);
    const double dx = (q.x - center.x - shift.x) / scale;
    const double dy = (q.y - center.y - shift.y) / scale;
    Point2 p{c * dx + s * dy + center.x, -s * dx + c * dy + center.y};
    if (mirror) p.x = 2.0 * center.x - p.x;
    return p;
  }
};

}  // namespace ertalign

#endif  // ERTALIGN_GEOMETRY_H_
