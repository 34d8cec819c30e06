#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace mvid {

struct PixelPoint {
  std::int64_t x = 0;
  std::int64_t y = 0;
  bool operator==(const PixelPoint&) const = default;
};

// Indices into the input point array, counter-clockwise in a y-down pixel
// frame when viewed with y pointing up (i.e. orient(a, b, c) > 0).
using Triangle = std::array<int, 3>;

// Twice the signed area of (a, b, c); exact for pixel coordinates.
std::int64_t orient2d(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c) noexcept;

// > 0 when d lies strictly inside the circumcircle of the positively oriented
// triangle (a, b, c); exact (128-bit) for coordinates below 2^24.
int incircle_sign(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c,
                  const PixelPoint& d) noexcept;

bool all_collinear(std::span<const PixelPoint> points) noexcept;

// Delaunay triangulation of distinct integer points. Returns an empty list
// when the points do not span a 2D region. The union of the triangles is
// exactly the convex hull of the input. Cocircular ties are resolved by the
// order in which points are swept, which is (y, x) ascending.
std::vector<Triangle> delaunay_triangulate(std::span<const PixelPoint> points);

}  // namespace mvid
