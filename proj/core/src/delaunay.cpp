#include "mvid/delaunay.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <utility>

namespace mvid {

std::int64_t orient2d(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c) noexcept {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

int incircle_sign(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c,
                  const PixelPoint& d) noexcept {
  __extension__ using i128 = __int128;
  const i128 adx = a.x - d.x, ady = a.y - d.y;
  const i128 bdx = b.x - d.x, bdy = b.y - d.y;
  const i128 cdx = c.x - d.x, cdy = c.y - d.y;
  const i128 alift = adx * adx + ady * ady;
  const i128 blift = bdx * bdx + bdy * bdy;
  const i128 clift = cdx * cdx + cdy * cdy;
  const i128 det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                   clift * (adx * bdy - bdx * ady);
  return (det > 0) - (det < 0);
}

bool all_collinear(std::span<const PixelPoint> points) noexcept {
  if (points.size() < 3) return true;
  const PixelPoint& a = points[0];
  std::size_t j = 1;
  while (j < points.size() && points[j] == a) ++j;
  if (j == points.size()) return true;
  for (std::size_t k = j + 1; k < points.size(); ++k) {
    if (orient2d(a, points[j], points[k]) != 0) return false;
  }
  return true;
}

namespace {

class EdgeMap {
 public:
  explicit EdgeMap(std::size_t n_points) : n_(n_points) {}

  void set(int a, int b, int tri) { map_[key(a, b)] = tri; }
  void erase(int a, int b) { map_.erase(key(a, b)); }
  int find(int a, int b) const {
    auto it = map_.find(key(a, b));
    return it == map_.end() ? -1 : it->second;
  }

 private:
  std::uint64_t key(int a, int b) const {
    return static_cast<std::uint64_t>(a) * n_ + static_cast<std::uint64_t>(b);
  }
  std::uint64_t n_;
  std::unordered_map<std::uint64_t, int> map_;
};

int third_vertex(const Triangle& t, int a, int b) {
  for (int v : t) {
    if (v != a && v != b) return v;
  }
  return -1;
}

// Sweep triangulation: every new point (in (y, x) order) lies outside the
// current hull, so it is connected to each hull edge it can see.
std::vector<Triangle> sweep_triangulation(std::span<const PixelPoint> pts,
                                          const std::vector<int>& order) {
  std::vector<Triangle> tris;
  const std::size_t n = order.size();

  std::size_t apex = 2;
  while (apex < n && orient2d(pts[order[0]], pts[order[1]], pts[order[apex]]) == 0) ++apex;
  if (apex == n) return tris;

  const int p_apex = order[apex];
  std::vector<int> hull;
  const bool left = orient2d(pts[order[0]], pts[order[apex - 1]], pts[p_apex]) > 0;
  for (std::size_t i = 0; i + 1 < apex; ++i) {
    int a = order[i], b = order[i + 1];
    if (!left) std::swap(a, b);
    tris.push_back({a, b, p_apex});
  }
  if (left) {
    for (std::size_t i = 0; i < apex; ++i) hull.push_back(order[i]);
    hull.push_back(p_apex);
  } else {
    hull.push_back(order[0]);
    hull.push_back(p_apex);
    for (std::size_t i = apex - 1; i >= 1; --i) hull.push_back(order[i]);
  }

  std::vector<char> visible;
  for (std::size_t k = apex + 1; k < n; ++k) {
    const int p = order[k];
    const std::size_t m = hull.size();
    visible.assign(m, 0);
    for (std::size_t i = 0; i < m; ++i) {
      visible[i] = orient2d(pts[hull[i]], pts[hull[(i + 1) % m]], pts[p]) < 0;
    }
    std::size_t start = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (visible[i] && !visible[(i + m - 1) % m]) {
        start = i;
        break;
      }
    }
    if (start == m) continue;  // unreachable for distinct, lexicographically sorted input

    std::size_t count = 0;
    while (count < m && visible[(start + count) % m]) {
      const int a = hull[(start + count) % m];
      const int b = hull[(start + count + 1) % m];
      tris.push_back({b, a, p});
      ++count;
    }

    std::vector<int> next;
    next.reserve(m - count + 2);
    for (std::size_t i = 0; i <= m - count; ++i) next.push_back(hull[(start + count + i) % m]);
    next.push_back(p);
    hull = std::move(next);
  }
  return tris;
}

void legalize(std::span<const PixelPoint> pts, std::vector<Triangle>& tris) {
  EdgeMap edges(pts.size());
  std::vector<std::pair<int, int>> stack;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int e = 0; e < 3; ++e) {
      const int a = tris[t][e], b = tris[t][(e + 1) % 3];
      edges.set(a, b, static_cast<int>(t));
      if (a < b) stack.emplace_back(a, b);
      else stack.emplace_back(b, a);
    }
  }

  while (!stack.empty()) {
    const auto [a, b] = stack.back();
    stack.pop_back();
    const int t1 = edges.find(a, b);
    const int t2 = edges.find(b, a);
    if (t1 < 0 || t2 < 0) continue;
    const int c = third_vertex(tris[t1], a, b);
    const int d = third_vertex(tris[t2], a, b);
    if (incircle_sign(pts[a], pts[b], pts[c], pts[d]) <= 0) continue;

    // (a, b, c) and (b, a, d) become (a, d, c) and (d, b, c).
    edges.erase(a, b);
    edges.erase(b, a);
    tris[t1] = {a, d, c};
    tris[t2] = {d, b, c};
    edges.set(a, d, t1);
    edges.set(d, c, t1);
    edges.set(c, a, t1);
    edges.set(d, b, t2);
    edges.set(b, c, t2);
    edges.set(c, d, t2);
    stack.emplace_back(a, d);
    stack.emplace_back(d, b);
    stack.emplace_back(b, c);
    stack.emplace_back(c, a);
  }
}

}  // namespace

std::vector<Triangle> delaunay_triangulate(std::span<const PixelPoint> points) {
  if (points.size() < 3) return {};
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) {
    return std::pair(points[i].y, points[i].x) < std::pair(points[j].y, points[j].x);
  });
  std::vector<Triangle> tris = sweep_triangulation(points, order);
  if (!tris.empty()) legalize(points, tris);
  return tris;
}

}  // namespace mvid
