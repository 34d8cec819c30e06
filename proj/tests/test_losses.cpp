#include <doctest.h>

#include <random>

#include "mvid/losses.hpp"
#include "oracles.hpp"

using namespace mvid;

namespace {

struct Instance {
  InverseDepthMap zh, zs;
  ValidMask mask;
};

Instance random_instance(std::mt19937_64& rng, int w, int h, double keep) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in{InverseDepthMap(w, h), InverseDepthMap(w, h), ValidMask(w, h)};
  for (std::size_t i = 0; i < in.zh.size(); ++i) {
    in.zh[i] = 0.2 + u(rng);
    in.zs[i] = 0.2 + u(rng);
    in.mask[i] = u(rng) < keep;
  }
  in.mask[0] = 1;
  return in;
}

}  // namespace

TEST_CASE("loss_depth examples") {
  InverseDepthMap zh(3, 1, std::vector<double>{1.0, 1.0, 1.0});
  InverseDepthMap zs(3, 1, std::vector<double>{1.1, 0.7, 100.0});
  ValidMask m(3, 1, std::vector<std::uint8_t>{1, 1, 0});
  CHECK(loss_depth(zh, zs, m) == doctest::Approx(0.2));
  CHECK(loss_depth(zh, zh, m) == 0.0);
  try {
    loss_depth(zh, zs, ValidMask(3, 1, 0));
    FAIL("expected EmptyMask");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyMask);
  }
}

TEST_CASE("loss_grad is zero for a constant offset") {
  std::mt19937_64 rng(1);
  auto in = random_instance(rng, 8, 8, 1.0);
  InverseDepthMap shifted = in.zs;
  for (auto& v : shifted.values()) v += 0.3;
  CHECK(loss_grad(shifted, in.zs, in.mask, 3) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(loss_grad(in.zs, in.zs, in.mask, 3) == 0.0);
}

TEST_CASE("losses match direct loops on random masked 8x8 instances") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto in = random_instance(rng, 8, 8, 0.7);
    const std::vector<std::uint8_t> mask(in.mask.storage());
    CHECK(loss_depth(in.zh, in.zs, in.mask) ==
          doctest::Approx(oracle::loss_depth(in.zh.storage(), in.zs.storage(), mask)).epsilon(1e-12));
    for (int k = 1; k <= 3; ++k) {
      const double o = oracle::loss_grad(in.zh.storage(), in.zs.storage(), mask, 8, 8, k);
      CHECK(std::abs(loss_grad(in.zh, in.zs, in.mask, k) - o) <= 1e-9);
    }
  }
}

TEST_CASE("loss_total weighting") {
  std::mt19937_64 rng(3);
  const auto in = random_instance(rng, 8, 8, 0.8);
  const double d = loss_depth(in.zh, in.zs, in.mask);
  const double g = loss_grad(in.zh, in.zs, in.mask, 3);
  const auto t = loss_total(in.zh, in.zs, in.mask, LossConfig{});
  CHECK(t.total == doctest::Approx(d + 0.5 * g));
  const auto t0 = loss_total(in.zh, in.zs, in.mask, LossConfig{3, 0.0});
  CHECK(t0.total == doctest::Approx(d));
}

TEST_CASE("analytic loss gradient matches finite differences") {
  std::mt19937_64 rng(9);
  const auto in = random_instance(rng, 8, 8, 0.75);
  const std::vector<std::uint8_t> mask(in.mask.storage());
  std::vector<double> zh(in.zh.storage());
  std::vector<double> grad(zh.size());
  loss_total_with_gradient(zh, in.zs.storage(), mask, 8, 8, LossConfig{}, grad);
  const double eps = 1e-7;
  for (std::size_t i = 0; i < zh.size(); ++i) {
    auto plus = zh, minus = zh;
    plus[i] += eps;
    minus[i] -= eps;
    std::vector<double> scratch(zh.size());
    const double lp = loss_total_with_gradient(plus, in.zs.storage(), mask, 8, 8, {}, scratch).total;
    const double lm = loss_total_with_gradient(minus, in.zs.storage(), mask, 8, 8, {}, scratch).total;
    CHECK(grad[i] == doctest::Approx((lp - lm) / (2 * eps)).epsilon(1e-5));
  }
}

TEST_CASE("empty coarse levels contribute nothing") {
  InverseDepthMap zh(4, 4, 0.5), zs(4, 4, 0.5);
  zs(1, 0) = 0.9;
  ValidMask m(4, 4, 0);
  m(0, 0) = 1;
  m(1, 0) = 1;
  // Level 0 has one valid horizontal pair; coarser levels have no full 2x2 block.
  CHECK(loss_grad(zh, zs, m, 3) == doctest::Approx(0.4 / 2.0 / 3.0));
}
