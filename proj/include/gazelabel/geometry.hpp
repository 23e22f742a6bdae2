#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>

#include "gazelabel/errors.hpp"

namespace gazelabel {

// Slide and screen dimensions for one recording session. All slide
// coordinates in this codebase are level-0 slide pixels.
struct SlideGeometry {
  std::int64_t slide_width = 0;
  std::int64_t slide_height = 0;
  double mpp = 0.0;  // microns per pixel
  std::int64_t screen_width = 0;
  std::int64_t screen_height = 0;

  void validate() const;
};

// Axis-aligned box in integer slide pixels, half-open:
// [x_min, x_max) x [y_min, y_max).
struct BBox {
  std::int64_t x_min = 0;
  std::int64_t y_min = 0;
  std::int64_t x_max = 0;
  std::int64_t y_max = 0;

  std::int64_t width() const { return x_max - x_min; }
  std::int64_t height() const { return y_max - y_min; }
  std::int64_t area() const { return width() * height(); }
  bool valid() const { return x_max > x_min && y_max > y_min; }

  friend auto operator<=>(const BBox&, const BBox&) = default;
};

inline std::int64_t intersection_area(const BBox& a, const BBox& b) {
  const std::int64_t w = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const std::int64_t h = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  return (w > 0 && h > 0) ? w * h : 0;
}

// Intersection rectangle; result may be degenerate, check valid().
inline BBox clip_box(const BBox& box, const BBox& to) {
  return BBox{std::max(box.x_min, to.x_min), std::max(box.y_min, to.y_min),
              std::min(box.x_max, to.x_max), std::min(box.y_max, to.y_max)};
}

}  // namespace gazelabel
