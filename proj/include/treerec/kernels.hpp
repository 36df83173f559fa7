#pragma once

#include <cstddef>
#include <span>

namespace treerec::kernels {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2& a, const Point2& b) {
    return a.x == b.x && a.y == b.y;
  }
  friend bool operator<(const Point2& a, const Point2& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  }
};

/// p ↦ (sx·x + ox, sy·y + oy)
struct Affine2 {
  double sx = 0.0, ox = 0.0, sy = 0.0, oy = 0.0;

  Point2 operator()(const Point2& p) const { return {sx * p.x + ox, sy * p.y + oy}; }
};

/// max over a of the distance to the closest point of b (directed Hausdorff).
/// b must be non-empty. The parallel variant splits the outer loop across
/// threads; the serial one is the reference the tests compare against.
double directed_hausdorff_serial(std::span<const Point2> a, std::span<const Point2> b);
double directed_hausdorff_parallel(std::span<const Point2> a, std::span<const Point2> b);

void apply_affine_serial(const Affine2& m, std::span<const Point2> in,
                         std::span<Point2> out);
void apply_affine_parallel(const Affine2& m, std::span<const Point2> in,
                           std::span<Point2> out);

}  // namespace treerec::kernels
