#include <doctest.h>

#include <random>

#include "mvid/tensor.hpp"
#include "oracles.hpp"

using namespace mvid;

namespace {

std::vector<double> random_vec(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> d(0.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("conv2d forward matches direct convolution") {
  std::mt19937_64 rng(1);
  for (const auto& [k, stride, h, w] : {std::array<int, 4>{3, 1, 7, 6}, {3, 2, 8, 8},
                                        {3, 2, 7, 5}, {1, 1, 5, 4}}) {
    const int c = 3, co = 4;
    Tensor<double> x(1, c, h, w);
    x.data = random_vec(rng, x.size());
    const auto wt = random_vec(rng, static_cast<std::size_t>(co) * c * k * k);
    const auto b = random_vec(rng, co);
    Tensor<double> y;
    conv2d_forward<double>(x, wt, b, co, k, stride, y);
    int oh = 0, ow = 0;
    const auto o = oracle::conv2d(x.data, c, h, w, wt, b, co, k, stride, oh, ow);
    REQUIRE(y.h == oh);
    REQUIRE(y.w == ow);
    for (std::size_t i = 0; i < o.size(); ++i) CHECK(y.data[i] == doctest::Approx(o[i]).epsilon(1e-12));
  }
}

TEST_CASE("conv2d backward is the adjoint of forward") {
  std::mt19937_64 rng(2);
  for (int stride : {1, 2}) {
    const int c = 2, co = 3, k = 3, h = 6, w = 6;
    Tensor<double> x(1, c, h, w);
    x.data = random_vec(rng, x.size());
    const auto wt = random_vec(rng, static_cast<std::size_t>(co) * c * k * k);
    const std::vector<double> zero_b(co, 0.0);
    Tensor<double> y;
    conv2d_forward<double>(x, wt, zero_b, co, k, stride, y);
    Tensor<double> dy(1, co, y.h, y.w);
    dy.data = random_vec(rng, dy.size());

    Tensor<double> dx;
    std::vector<double> dw(wt.size(), 0.0), db(co, 0.0);
    conv2d_backward<double>(x, wt, dy, k, stride, &dx, dw, db);

    // <y, dy> = <x, dx> (linear in x) and = <w, dw> (linear in w).
    CHECK(dot(y.data, dy.data) == doctest::Approx(dot(x.data, dx.data)).epsilon(1e-10));
    CHECK(dot(y.data, dy.data) == doctest::Approx(dot(wt, dw)).epsilon(1e-10));
    double sum_dy = 0.0;
    for (int i = 0; i < dy.h * dy.w; ++i) sum_dy += dy.plane(0, 1)[i];
    CHECK(db[1] == doctest::Approx(sum_dy).epsilon(1e-12));
  }
}

TEST_CASE("bilinear upsample with aligned corners") {
  Tensor<double> x(1, 1, 2, 2);
  x.data = {0.0, 1.0, 2.0, 3.0};
  const auto y = upsample2x(x);
  REQUIRE(y.h == 4);
  REQUIRE(y.w == 4);
  CHECK(y.at(0, 0, 0, 0) == 0.0);
  CHECK(y.at(0, 0, 0, 3) == 1.0);
  CHECK(y.at(0, 0, 3, 0) == 2.0);
  CHECK(y.at(0, 0, 3, 3) == 3.0);
  CHECK(y.at(0, 0, 0, 1) == doctest::Approx(1.0 / 3.0));

  std::mt19937_64 rng(3);
  Tensor<double> a(2, 2, 3, 5);
  a.data = random_vec(rng, a.size());
  const auto up = upsample2x(a);
  Tensor<double> g(up.n, up.c, up.h, up.w);
  g.data = random_vec(rng, g.size());
  const auto back = upsample2x_backward(g, 3, 5);
  CHECK(dot(up.data, g.data) == doctest::Approx(dot(a.data, back.data)).epsilon(1e-12));
}

TEST_CASE("relu and its backward") {
  Tensor<double> x(1, 1, 1, 4);
  x.data = {-1.0, 0.0, 0.5, 2.0};
  relu_inplace(x);
  CHECK(x.data == std::vector<double>{0.0, 0.0, 0.5, 2.0});
  Tensor<double> dy(1, 1, 1, 4, 1.0);
  relu_backward_inplace(x, dy);
  CHECK(dy.data == std::vector<double>{0.0, 0.0, 1.0, 1.0});
}
