#include <doctest.h>

#include <random>
#include <set>

#include "mvid/sml.hpp"

using namespace mvid;

namespace {

SmlConfig small_config() {
  SmlConfig c;
  c.stage_widths = {4, 6, 8, 8};
  return c;
}

Tensor<float> random_input(int n, int c, int h, int w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> d(0.0f, 1.0f);
  Tensor<float> t(n, c, h, w);
  for (auto& v : t.data) v = d(rng);
  return t;
}

}  // namespace

TEST_CASE("layout is determined by the config") {
  const auto a = parameter_layout(SmlConfig{});
  const auto b = parameter_layout(SmlConfig{});
  REQUIRE(a.size() == b.size());
  std::set<std::string> names;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].name == b[i].name);
    CHECK(a[i].dims == b[i].dims);
    CHECK(a[i].offset == offset);
    offset += a[i].count();
    CHECK(names.insert(a[i].name).second);
  }
  CHECK(names.count("encoder.0.conv1.weight") == 1);
  CHECK(names.count("fusion.3.rcu1.conv1.weight") == 1);
  CHECK(names.count("head.out.weight") == 1);
  CHECK(names.count("shift_head.out.weight") == 0);

  SmlConfig s;
  s.regress_shift = true;
  bool has_shift = false;
  for (const auto& t : parameter_layout(s)) has_shift |= t.name == "shift_head.out.weight";
  CHECK(has_shift);

  SmlConfig bad;
  bad.input_resolution = 90;
  CHECK_THROWS_AS(bad.validate(), Error);
}

TEST_CASE("zero output head regresses zero") {
  const auto weights = SmlWeights::initialize(small_config(), 4);
  for (float v : weights.tensor("head.out.weight")) CHECK(v == 0.0f);
  SmlNetwork<float> net(weights);
  const auto out = net.forward(random_input(1, 2, 32, 32, 1));
  REQUIRE(out.residual.h == 32);
  REQUIRE(out.residual.w == 32);
  REQUIRE(out.residual.c == 1);
  for (float v : out.residual.data) CHECK(v == 0.0f);
}

TEST_CASE("96x96 input gives a 96x96 residual") {
  SmlNetwork<float> net(SmlWeights::initialize(SmlConfig{}, 0, false));
  const auto out = net.forward(random_input(1, 2, 96, 96, 2));
  CHECK(out.residual.h == 96);
  CHECK(out.residual.w == 96);
  CHECK(out.shift.data.empty());
}

TEST_CASE("batched outputs equal single-sample outputs") {
  const auto weights = SmlWeights::initialize(small_config(), 9, false);
  SmlNetwork<double> net(weights);
  const auto in32 = random_input(2, 2, 16, 32, 5);
  Tensor<double> both(2, 2, 16, 32);
  for (std::size_t i = 0; i < in32.size(); ++i) both.data[i] = in32.data[i];
  const auto batched = net.forward(both).residual;
  for (int b = 0; b < 2; ++b) {
    Tensor<double> one(1, 2, 16, 32);
    std::copy(both.sample(b), both.sample(b) + both.sample_size(), one.data.begin());
    const auto single = net.forward(one).residual;
    for (std::size_t i = 0; i < single.size(); ++i) {
      CHECK(single.data[i] == doctest::Approx(batched.sample(b)[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("shape errors") {
  SmlNetwork<float> net(SmlWeights::initialize(small_config(), 0));
  auto check_code = [&](const Tensor<float>& t) {
    try {
      net.forward(t);
      FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kShapeMismatch);
    }
  };
  check_code(random_input(1, 3, 16, 16, 0));
  check_code(random_input(1, 2, 20, 16, 0));
}

TEST_CASE("shift head shares the trunk") {
  SmlConfig c = small_config();
  c.regress_shift = true;
  auto weights = SmlWeights::initialize(c, 3, false);
  SmlNetwork<float> net(weights);
  const auto out = net.forward(random_input(1, 2, 16, 16, 3));
  CHECK(out.shift.h == 16);
  CHECK(out.shift.c == 1);
}

TEST_CASE("apply_residual") {
  const auto p = ClampProfile::void_profile();
  InverseDepthMap zt(3, 1, std::vector<double>{0.5, 0.5, 20.0});
  Grid<double> r(3, 1, std::vector<double>{1.0, -2.0, 0.0});
  const auto z = apply_residual(zt, r, nullptr, p);
  CHECK(z[0] == 1.0);
  CHECK(z[1] == p.min_inverse());
  CHECK(z[2] == p.max_inverse());

  Grid<double> zero_r(3, 1, 0.0);
  Grid<double> zero_t(3, 1, 0.0);
  CHECK(apply_residual(zt, zero_r, &zero_t, p) == apply_residual(zt, zero_r, nullptr, p));
  CHECK(apply_residual(zt, zero_r, nullptr, p) == clamp_prediction(zt, p));

  Grid<double> t(3, 1, 0.25);
  CHECK(apply_residual(zt, r, &t, p)[0] == 1.25);
}

TEST_CASE("channel assembly order") {
  SmlConfig c;
  c.extra.confidence = true;
  c.extra.grayscale = true;
  CHECK(c.in_channels() == 4);
  SmlFrameChannels ch;
  ch.z_tilde = InverseDepthMap(2, 1, 0.5);
  ch.scaffold = ScaleScaffold(2, 1, 1.5);
  ch.confidence = ConfidenceMap(2, 1, 0.25);
  ch.gray = GrayImage(2, 1, 0.75);
  const auto v = assemble_channels<double>(c, ch);
  CHECK(v == std::vector<double>{0.5, 0.5, 0.5, 0.5, 0.25, 0.25, 0.75, 0.75});

  SmlFrameChannels missing;
  missing.z_tilde = InverseDepthMap(2, 1, 0.5);
  missing.scaffold = ScaleScaffold(2, 1, 1.0);
  CHECK_THROWS_AS(assemble_channels<double>(c, missing), Error);
  CHECK(InputChannels::from_bits(c.extra.bits()) == c.extra);
}
