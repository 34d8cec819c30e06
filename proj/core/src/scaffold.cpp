#include "mvid/scaffold.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "mvid/delaunay.hpp"

namespace mvid {

AnchorSet compute_anchors(std::span<const SparsePoint> sparse, const InverseDepthMap& z_tilde) {
  validate_sparse(sparse, z_tilde.width(), z_tilde.height());
  AnchorSet out;
  out.anchors.reserve(sparse.size());
  for (const auto& p : sparse) {
    const double zt = z_tilde(p.u, p.v);
    if (!(zt >= kAnchorMinInverse)) {
      ++out.dropped;
      continue;
    }
    out.anchors.push_back({p.u, p.v, (1.0 / p.depth) / zt});
  }
  return out;
}

ScaleScaffold build_scaffold(std::span<const ScaleAnchor> anchors, int width, int height) {
  ScaleScaffold scaffold(width, height, 1.0);

  std::vector<PixelPoint> pts;
  pts.reserve(anchors.size());
  std::set<std::pair<int, int>> seen;
  for (const auto& a : anchors) {
    if (!seen.emplace(a.u, a.v).second) {
      fail(ErrorCode::kDuplicateAnchorPixel,
           "two anchors at (" + std::to_string(a.u) + "," + std::to_string(a.v) + ")");
    }
    pts.push_back({a.u, a.v});
  }

  const std::vector<Triangle> tris = all_collinear(pts) ? std::vector<Triangle>{}
                                                         : delaunay_triangulate(pts);
  if (tris.empty()) {
    scaffold.identity = true;
    return scaffold;
  }

  std::vector<std::uint8_t> filled(scaffold.size(), 0);
  for (const Triangle& t : tris) {
    const PixelPoint& a = pts[t[0]];
    const PixelPoint& b = pts[t[1]];
    const PixelPoint& c = pts[t[2]];
    const std::int64_t area = orient2d(a, b, c);
    if (area <= 0) continue;
    const double ra = anchors[t[0]].ratio;
    const double rb = anchors[t[1]].ratio;
    const double rc = anchors[t[2]].ratio;

    const auto x0 = std::max<std::int64_t>(0, std::min({a.x, b.x, c.x}));
    const auto x1 = std::min<std::int64_t>(width - 1, std::max({a.x, b.x, c.x}));
    const auto y0 = std::max<std::int64_t>(0, std::min({a.y, b.y, c.y}));
    const auto y1 = std::min<std::int64_t>(height - 1, std::max({a.y, b.y, c.y}));
    for (std::int64_t y = y0; y <= y1; ++y) {
      for (std::int64_t x = x0; x <= x1; ++x) {
        const std::size_t idx = static_cast<std::size_t>(y) * static_cast<std::size_t>(width) +
                                static_cast<std::size_t>(x);
        if (filled[idx]) continue;
        const PixelPoint p{x, y};
        const std::int64_t wa = orient2d(b, c, p);
        const std::int64_t wb = orient2d(c, a, p);
        const std::int64_t wc = orient2d(a, b, p);
        if (wa < 0 || wb < 0 || wc < 0) continue;
        if (wa == area) {
          scaffold[idx] = ra;
        } else if (wb == area) {
          scaffold[idx] = rb;
        } else if (wc == area) {
          scaffold[idx] = rc;
        } else {
          const double inv = 1.0 / static_cast<double>(area);
          const double value = (static_cast<double>(wa) * ra + static_cast<double>(wb) * rb +
                                static_cast<double>(wc) * rc) *
                               inv;
          scaffold[idx] = std::clamp(value, std::min({ra, rb, rc}), std::max({ra, rb, rc}));
        }
        filled[idx] = 1;
      }
    }
  }
  return scaffold;
}

}  // namespace mvid
