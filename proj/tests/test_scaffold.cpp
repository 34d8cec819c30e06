#include <doctest.h>

#include <random>
#include <set>

#include "mvid/delaunay.hpp"
#include "mvid/scaffold.hpp"
#include "oracles.hpp"

using namespace mvid;

namespace {

std::vector<ScaleAnchor> random_anchors(std::mt19937_64& rng, int n, int w, int h) {
  std::uniform_int_distribution<int> du(0, w - 1), dv(0, h - 1);
  std::uniform_real_distribution<double> dr(0.5, 2.0);
  std::set<std::pair<int, int>> used;
  std::vector<ScaleAnchor> out;
  while (static_cast<int>(out.size()) < n) {
    const int u = du(rng), v = dv(rng);
    if (!used.emplace(u, v).second) continue;
    out.push_back({u, v, dr(rng)});
  }
  return out;
}

bool near_any(double value, const std::vector<double>& candidates, double tol) {
  for (double c : candidates) {
    if (std::abs(value - c) <= tol) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("compute_anchors ratios and drops") {
  InverseDepthMap zt(4, 1, std::vector<double>{0.5, 0.25, 0.0, 1e-7});
  SparsePoints sp{{0, 0, 2.0}, {1, 0, 2.0}, {2, 0, 2.0}, {3, 0, 2.0}};
  const AnchorSet a = compute_anchors(sp, zt);
  REQUIRE(a.anchors.size() == 2);
  CHECK(a.anchors[0].ratio == 1.0);
  CHECK(a.anchors[1].ratio == 2.0);
  CHECK(a.dropped == 2);
}

TEST_CASE("triangle centroid is the mean ratio") {
  std::vector<ScaleAnchor> a{{0, 0, 1.0}, {9, 0, 2.0}, {0, 9, 3.0}};
  const auto s = build_scaffold(a, 12, 12);
  CHECK_FALSE(s.identity);
  CHECK(s(3, 3) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s(0, 0) == 1.0);
  CHECK(s(9, 0) == 2.0);
  CHECK(s(0, 9) == 3.0);
  CHECK(s(11, 11) == 1.0);
  CHECK(s(9, 9) == 1.0);
}

TEST_CASE("fewer than three non-collinear anchors give the identity map") {
  for (const auto& a : {std::vector<ScaleAnchor>{},
                        std::vector<ScaleAnchor>{{3, 3, 2.0}},
                        std::vector<ScaleAnchor>{{1, 1, 2.0}, {5, 6, 3.0}},
                        std::vector<ScaleAnchor>{{0, 4, 2.0}, {3, 4, 3.0}, {9, 4, 0.5}},
                        std::vector<ScaleAnchor>{{2, 0, 2.0}, {2, 5, 3.0}, {2, 9, 0.5}}}) {
    const auto s = build_scaffold(a, 10, 10);
    CHECK(s.identity);
    for (double v : s.values()) CHECK(v == 1.0);
  }
}

TEST_CASE("duplicate anchor pixels are rejected") {
  std::vector<ScaleAnchor> a{{1, 1, 2.0}, {1, 1, 3.0}, {5, 5, 1.0}};
  try {
    build_scaffold(a, 8, 8);
    FAIL("expected DuplicateAnchorPixel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDuplicateAnchorPixel);
  }
}

TEST_CASE("delaunay triangulation matches the empty-circle oracle on general points") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const auto anchors = random_anchors(rng, 25, 40, 40);
    std::vector<PixelPoint> pts;
    std::vector<oracle::Pt> opts;
    for (const auto& a : anchors) {
      pts.push_back({a.u, a.v});
      opts.push_back({a.u, a.v});
    }
    const auto tris = delaunay_triangulate(pts);
    for (const auto& t : tris) {
      CHECK(orient2d(pts[t[0]], pts[t[1]], pts[t[2]]) > 0);
      for (std::size_t m = 0; m < pts.size(); ++m) {
        CHECK(oracle::in_circumcircle(opts[t[0]], opts[t[1]], opts[t[2]], opts[m]) <= 0);
      }
    }
  }
}

TEST_CASE("random scaffolds match the exhaustive triangle oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 3 + trial * 5;
    const auto anchors = random_anchors(rng, n, 32, 32);
    const auto s = build_scaffold(anchors, 32, 32);
    const auto cand = oracle::scaffold_candidates(anchors, 32, 32);
    double lo = 1e9, hi = -1e9;
    for (const auto& a : anchors) {
      lo = std::min(lo, a.ratio);
      hi = std::max(hi, a.ratio);
    }
    std::vector<oracle::Pt> pts;
    for (const auto& a : anchors) pts.push_back({a.u, a.v});
    for (int v = 0; v < 32; ++v) {
      for (int u = 0; u < 32; ++u) {
        const auto& c = cand[static_cast<std::size_t>(v) * 32 + u];
        const double value = s(u, v);
        if (c.empty()) {
          CHECK_FALSE(oracle::in_hull(pts, {u, v}));
          CHECK(value == 1.0);
        } else {
          CHECK(near_any(value, c, 1e-5));
          CHECK(value >= lo);
          CHECK(value <= hi);
        }
      }
    }
    for (const auto& a : anchors) CHECK(s(a.u, a.v) == doctest::Approx(a.ratio).epsilon(1e-12));
  }
}

TEST_CASE("cocircular grid anchors") {
  std::vector<ScaleAnchor> a;
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 4; ++u) a.push_back({u * 5, v * 5, 1.0 + 0.1 * u + 0.2 * v});
  const auto s = build_scaffold(a, 20, 20);
  // Bilinear-in-plane data is reproduced exactly by any triangulation.
  for (int v = 0; v <= 15; ++v)
    for (int u = 0; u <= 15; ++u)
      CHECK(s(u, v) == doctest::Approx(1.0 + 0.02 * u + 0.04 * v).epsilon(1e-12));
  CHECK(s(16, 3) == 1.0);
}
