#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "mvid/global_align.hpp"
#include "mvid/sparsify.hpp"
#include "mvid/synth.hpp"

using namespace mvid;

namespace {

double min_pairwise(const SparsePoints& p) {
  double best = 1e300;
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = i + 1; j < p.size(); ++j)
      best = std::min(best, std::hypot(p[i].u - p[j].u, p[i].v - p[j].v));
  return best;
}

double mean_nearest(const SparsePoints& p) {
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    double best = 1e300;
    for (std::size_t j = 0; j < p.size(); ++j)
      if (i != j) best = std::min(best, std::hypot(p[i].u - p[j].u, p[i].v - p[j].v));
    acc += best;
  }
  return acc / static_cast<double>(p.size());
}

// Convex hull area by gift wrapping over integer points.
double hull_area(const SparsePoints& p) {
  std::vector<std::pair<long, long>> pts;
  for (const auto& q : p) pts.emplace_back(q.u, q.v);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return 0.0;
  auto cross = [](auto o, auto a, auto b) {
    return (a.first - o.first) * (b.second - o.second) - (a.second - o.second) * (b.first - o.first);
  };
  std::vector<std::pair<long, long>> h(2 * pts.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && cross(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (std::size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && cross(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
    h[k++] = pts[i - 1];
  }
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < k; ++i)
    area += static_cast<double>(h[i].first * h[i + 1].second - h[i + 1].first * h[i].second);
  return std::abs(area) / 2.0;
}

SyntheticScene scene(std::uint64_t seed) {
  SceneConfig c;
  c.seed = seed;
  return synth_scene(c);
}

}  // namespace

TEST_CASE("min-distance sampler") {
  const auto s = scene(1);
  SparsifierConfig c;
  SUBCASE("zero count") {
    c.target_count = 0;
    CHECK(sparsify(s.gt, c, &s.rgb).empty());
  }
  SUBCASE("min_dist 0 reaches the target") {
    c.min_dist = 0.0;
    c.target_count = 300;
    CHECK(sparsify(s.gt, c, &s.rgb).size() == 300);
  }
  SUBCASE("spacing, exact depths and determinism") {
    for (double d : {2.0, 4.0, 7.5}) {
      c.min_dist = d;
      c.seed = 5;
      const auto p = sparsify(s.gt, c, &s.rgb);
      CHECK(min_pairwise(p) >= d);
      for (const auto& q : p) CHECK(q.depth == s.gt(q.u, q.v));
      CHECK(p == sparsify(s.gt, c, &s.rgb));
      CHECK_NOTHROW(validate_sparse(p, 96, 96));
    }
  }
  SUBCASE("exhaustion on a tiny frame") {
    DepthFrame tiny(6, 6, 2.0);
    c.target_count = 1500;
    const auto p = sample_min_distance(tiny, c);
    CHECK(p.size() < 1500);
    CHECK(!p.empty());
  }
  SUBCASE("coverage") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto sc = scene(100 + seed);
      c.seed = seed;
      CHECK(hull_area(sparsify(sc.gt, c, &sc.rgb)) >= 0.5 * 96 * 96);
    }
  }
}

TEST_CASE("clustered sampler") {
  const auto s = scene(2);
  SparsifierConfig c;
  c.mode = SparsifierMode::kClustered;
  SUBCASE("zero sigma collapses onto centers") {
    c.cluster_sigma = 0.0;
    const auto p = sparsify(s.gt, c);
    CHECK(p.size() <= static_cast<std::size_t>(c.cluster_count));
  }
  SUBCASE("bounded, unique and in frame") {
    for (int count : {50, 150, 500}) {
      c.target_count = count;
      const auto p = sparsify(s.gt, c);
      CHECK(p.size() <= static_cast<std::size_t>(count));
      CHECK_NOTHROW(validate_sparse(p, 96, 96));
    }
  }
  SUBCASE("more clustered than min-distance") {
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto sc = scene(200 + seed);
      SparsifierConfig md;
      md.seed = seed;
      c.seed = seed;
      const auto a = sparsify(sc.gt, c);
      md.target_count = static_cast<int>(a.size());
      const auto b = sparsify(sc.gt, md, &sc.rgb);
      wins += mean_nearest(a) < mean_nearest(b);
    }
    CHECK(wins == 20);
  }
}

TEST_CASE("mode names") {
  CHECK(parse_sparsifier_mode("clustered") == SparsifierMode::kClustered);
  CHECK(sparsifier_mode_name(SparsifierMode::kMinDistance) == "min_distance");
  CHECK_THROWS_AS(parse_sparsifier_mode("grid"), Error);
}

TEST_CASE("synthetic scenes") {
  SceneConfig c;
  c.seed = 3;
  const auto a = synth_scene(c);
  const auto b = synth_scene(c);
  CHECK(a.gt == b.gt);
  CHECK(a.rgb == b.rgb);
  for (double d : a.gt.values()) {
    CHECK(d >= c.depth_min);
    CHECK(d <= c.depth_max);
  }
  c.blob_count = 0;
  const auto plane = synth_scene(c);
  // A plane in (u, v): second differences vanish.
  for (int v = 0; v < 96; ++v)
    for (int u = 1; u < 95; ++u)
      CHECK(plane.gt(u - 1, v) - 2 * plane.gt(u, v) + plane.gt(u + 1, v) ==
            doctest::Approx(0.0).epsilon(1e-9).scale(1.0));
}

TEST_CASE("synthetic predictions") {
  SceneConfig c;
  c.seed = 4;
  const auto s = synth_scene(c);
  const InverseDepthMap gt_inv = to_inverse(s.gt).first;

  SUBCASE("identity distortion") {
    PredictionDistortion d{false, 1.0, 0.0};
    CHECK(synth_prediction(gt_inv, 1, d).z == gt_inv);
  }
  SUBCASE("global alignment undoes a pure affine distortion") {
    PredictionDistortion d;
    d.local_field = false;
    const auto p = synth_prediction(gt_inv, 9, d);
    CHECK(p.scale >= 0.3);
    CHECK(p.scale <= 3.0);
    SparsePoints dense;
    for (int v = 0; v < 96; v += 3)
      for (int u = 0; u < 96; u += 3) dense.push_back({u, v, s.gt(u, v)});
    const auto a = fit_global(p.z, dense);
    const auto z = apply_global(p.z, a, ClampProfile::void_profile());
    for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(z[i] - gt_inv[i]) <= 1e-5);
  }
  SUBCASE("field range and non-negativity") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto p = synth_prediction(gt_inv, seed);
      CHECK(p.shift >= -0.2);
      CHECK(p.shift <= 0.2);
      for (double m : p.field.values()) {
        CHECK(m >= 0.8);
        CHECK(m <= 1.25);
      }
      for (double z : p.z.values()) CHECK(z >= 0.0);
    }
  }
}
