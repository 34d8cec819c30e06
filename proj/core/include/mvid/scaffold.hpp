#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mvid/depth.hpp"

namespace mvid {

struct ScaleAnchor {
  int u = 0;
  int v = 0;
  double ratio = 1.0;  // metric inverse depth / aligned inverse depth
};

struct AnchorSet {
  std::vector<ScaleAnchor> anchors;
  std::size_t dropped = 0;  // points whose aligned inverse depth was below kAnchorMinInverse
};

// Dense scale guesses; 1.0 outside the anchor convex hull.
struct ScaleScaffold : Grid<double> {
  using Grid<double>::Grid;
  bool identity = false;  // fewer than three non-collinear anchors
};

inline constexpr double kAnchorMinInverse = 1e-6;  // 1/m

AnchorSet compute_anchors(std::span<const SparsePoint> sparse, const InverseDepthMap& z_tilde);

// Delaunay triangulation of the anchor pixels with barycentric fill inside
// the hull. Throws kDuplicateAnchorPixel when two anchors share a pixel.
ScaleScaffold build_scaffold(std::span<const ScaleAnchor> anchors, int width, int height);

}  // namespace mvid
