#include <doctest.h>

#include <cmath>
#include <sstream>

#include "mvid/metrics.hpp"

using namespace mvid;

TEST_CASE("two-pixel hand check") {
  DepthFrame gt(2, 1, std::vector<double>{2.0, 4.0});
  DepthFrame pred(2, 1, std::vector<double>{2.5, 4.0});
  const auto m = frame_metrics(pred, gt, ClampProfile::void_profile());
  CHECK(m.imae == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(m.irmse == doctest::Approx(std::sqrt(100.0 * 100.0 / 2.0)).epsilon(1e-12));
  CHECK(m.iabsrel == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(m.mae_mm == 250.0);
  CHECK(m.rmse_mm == doctest::Approx(std::sqrt(500.0 * 500.0 / 2.0)).epsilon(1e-12));
  CHECK(m.valid_pixels == 2);
}

TEST_CASE("perfect prediction and out-of-range pixels") {
  DepthFrame gt(3, 1, std::vector<double>{2.0, 4.0, 6.0});
  DepthFrame pred(3, 1, std::vector<double>{2.0, 4.0, 1.0});
  const auto m = frame_metrics(pred, gt, ClampProfile::void_profile());
  CHECK(m.mae_mm == 0.0);
  CHECK(m.irmse == 0.0);
  CHECK(m.valid_pixels == 2);
}

TEST_CASE("empty mask") {
  DepthFrame gt(2, 1, 9.0), pred(2, 1, 2.0);
  try {
    frame_metrics(pred, gt, ClampProfile::void_profile());
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyMask);
  }
}

TEST_CASE("masked-out pixels do not influence metrics") {
  DepthFrame gt(3, 1, std::vector<double>{2.0, 0.0, 7.0});
  DepthFrame a(3, 1, std::vector<double>{2.2, 1.0, 1.0});
  DepthFrame b(3, 1, std::vector<double>{2.2, 3.0, 0.3});
  const auto p = ClampProfile::void_profile();
  const auto ma = frame_metrics(a, gt, p), mb = frame_metrics(b, gt, p);
  CHECK(ma.imae == mb.imae);
  CHECK(ma.irmse == mb.irmse);
  CHECK(ma.mae_mm == mb.mae_mm);
}

TEST_CASE("power-mean ordering and units") {
  DepthFrame gt(4, 1, std::vector<double>{1.0, 2.0, 3.0, 4.5});
  DepthFrame pred(4, 1, std::vector<double>{1.3, 1.7, 3.6, 4.0});
  const auto m = frame_metrics(pred, gt, ClampProfile::void_profile());
  CHECK(m.rmse_mm >= m.mae_mm);
  CHECK(m.irmse >= m.imae);
  double per_m = 0.0;
  for (int i = 0; i < 4; ++i) per_m += std::abs(1.0 / gt[i] - 1.0 / pred[i]);
  CHECK(per_m / 4 * 1000.0 == doctest::Approx(m.imae).epsilon(1e-14));
}

TEST_CASE("aggregation") {
  FrameMetrics a, b;
  a.imae = 10;
  b.imae = 30;
  a.valid_pixels = b.valid_pixels = 1;
  const std::vector<FrameMetrics> ab{a, b}, ba{b, a};
  CHECK(aggregate(ab).imae == 20.0);
  CHECK(aggregate(std::vector<FrameMetrics>{a}).imae == 10.0);
  CHECK(aggregate(ba).imae == aggregate(ab).imae);
  CHECK_THROWS_AS(aggregate(std::vector<FrameMetrics>{}), Error);
}

TEST_CASE("pooled aggregation weights by pixel count") {
  DepthFrame gt1(1, 1, 2.0), p1(1, 1, 2.5);
  DepthFrame gt2(3, 1, 2.0), p2(3, 1, 2.0);
  const auto prof = ClampProfile::void_profile();
  const std::vector<FrameMetrics> f{frame_metrics(p1, gt1, prof), frame_metrics(p2, gt2, prof)};
  CHECK(aggregate(f, Pooling::kPooledPixels).imae == doctest::Approx(100.0 / 4));
  CHECK(aggregate(f).imae == doctest::Approx(50.0));
}

TEST_CASE("compare") {
  AggregateReport base, cand;
  base.frames = cand.frames = 10;
  base.imae = 22.94;
  cand.imae = 16.11;
  base.irmse = 10;
  cand.irmse = 12;
  const auto c = compare(base, cand);
  CHECK(c.imae == doctest::Approx(29.77).epsilon(1e-3));
  CHECK(c.irmse < 0.0);
  CHECK(compare(base, base).imae == 0.0);
  cand.frames = 9;
  CHECK_THROWS_AS(compare(base, cand), Error);
  cand.frames = 10;
  cand.density = 50;
  CHECK_THROWS_AS(compare(base, cand), Error);
}

TEST_CASE("csv report") {
  FrameMetrics a;
  a.frame_id = "f0";
  a.imae = 1.5;
  a.valid_pixels = 7;
  const std::vector<FrameMetrics> v{a};
  std::ostringstream out;
  write_metrics_csv(out, v, aggregate(v));
  CHECK(out.str() ==
        "frame_id,mae_mm,rmse_mm,imae,irmse,iabsrel,valid_pixels\n"
        "f0,0.000000,0.000000,1.500000,0.000000,0.000000,7\n"
        "mean,0.000000,0.000000,1.500000,0.000000,0.000000,7\n");
}
