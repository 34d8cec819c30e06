#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "mvid/checkpoint.hpp"
#include "mvid/formats.hpp"
#include "mvid/png_io.hpp"
#include "mvid/render.hpp"
#include "test_util.hpp"

using namespace mvid;
using testutil::TempDir;

namespace {

template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an mvid::Error");
  return ErrorCode::kInvalidArgument;
}

}  // namespace

TEST_CASE("depth png decoding conventions") {
  TempDir dir;
  DepthFrame f(3, 1, std::vector<double>{2.0, 0.0, 1.0});
  write_depth_png(f, dir / "mm.png", DepthEncoding::kMillimeters);
  const auto mm = read_depth_png(dir / "mm.png", DepthEncoding::kMillimeters);
  CHECK(mm[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(mm[1] == 0.0);
  // The same counts read as q8.8.
  const auto q = read_depth_png(dir / "mm.png", DepthEncoding::kQ8_8);
  CHECK(q[0] == 2000.0 / 256.0);

  DepthFrame g(1, 1, 2.0);
  write_depth_png(g, dir / "q.png", DepthEncoding::kQ8_8);
  CHECK(read_depth_png(dir / "q.png", DepthEncoding::kMillimeters)[0] ==
        doctest::Approx(0.512).epsilon(1e-15));
}

TEST_CASE("depth png round trip, rounding and saturation") {
  TempDir dir;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.05, 60.0);
  for (auto enc : {DepthEncoding::kMillimeters, DepthEncoding::kQ8_8}) {
    DepthFrame f(17, 9);
    for (auto& v : f.values()) v = u(rng);
    f[3] = 0.0;
    f[4] = -1.0;
    write_depth_png(f, dir / "rt.png", enc);
    const auto back = read_depth_png(dir / "rt.png", enc);
    const double q = depth_quantum(enc);
    for (std::size_t i = 0; i < f.size(); ++i) {
      if (!is_valid_depth(f[i])) {
        CHECK(back[i] == 0.0);
      } else if (f[i] < 65535 * q) {
        CHECK(std::abs(back[i] - f[i]) <= 0.5 * q + 1e-12);
      }
    }
  }
  DepthFrame big(2, 1, std::vector<double>{300.0, 0.0025});
  write_depth_png(big, dir / "sat.png", DepthEncoding::kQ8_8);
  const auto s = read_depth_png(dir / "sat.png", DepthEncoding::kQ8_8);
  CHECK(s[0] == 65535.0 / 256.0);
  CHECK(s[1] == 1.0 / 256.0);  // tiny valid depths stay valid

  // Ties go to even counts: 2.5 -> 2, 3.5 -> 4.
  DepthFrame ties(2, 1, std::vector<double>{2.5 / 256.0, 3.5 / 256.0});
  write_depth_png(ties, dir / "ties.png", DepthEncoding::kQ8_8);
  const auto t = read_depth_png(dir / "ties.png", DepthEncoding::kQ8_8);
  CHECK(t[0] == 2.0 / 256.0);
  CHECK(t[1] == 4.0 / 256.0);
}

TEST_CASE("depth png rejects other formats") {
  TempDir dir;
  testutil::write_bytes(dir / "junk.png", {'n', 'o', 't', ' ', 'p', 'n', 'g', '!', '!'});
  CHECK(code_of([&] { read_depth_png(dir / "junk.png", DepthEncoding::kMillimeters); }) ==
        ErrorCode::kBadFormat);
  write_rgb_png(RgbImage(4, 4), dir / "rgb.png");
  CHECK(code_of([&] { read_depth_png(dir / "rgb.png", DepthEncoding::kMillimeters); }) ==
        ErrorCode::kBadFormat);
  CHECK(code_of([&] { read_depth_png(dir / "missing.png", DepthEncoding::kMillimeters); }) ==
        ErrorCode::kIoFailure);
  CHECK(code_of([&] { write_depth_png(DepthFrame(2, 2, 1.0), dir / "no/such/dir.png",
                                      DepthEncoding::kMillimeters); }) == ErrorCode::kIoFailure);
}

TEST_CASE("rgb png round trip") {
  TempDir dir;
  RgbImage img(5, 3);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = {i / 15.0, 0.5, 1.0 - i / 15.0};
  write_rgb_png(img, dir / "c.png");
  const auto back = read_rgb_png(dir / "c.png");
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(std::abs(back[i].r - img[i].r) <= 0.5 / 255 + 1e-12);
    CHECK(std::abs(back[i].b - img[i].b) <= 0.5 / 255 + 1e-12);
  }
}

TEST_CASE("pfm round trip") {
  TempDir dir;
  InverseDepthMap z(4, 3);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = 0.125 * static_cast<double>(i);
  write_inverse_pfm(z, dir / "z.pfm");
  CHECK(read_inverse_pfm(dir / "z.pfm") == z);
  const auto bytes = testutil::read_bytes(dir / "z.pfm");
  CHECK(std::string(bytes.begin(), bytes.begin() + 3) == "Pf\n");
}

TEST_CASE("sparse csv") {
  std::vector<std::string> warnings;
  const auto p = parse_sparse_csv("# header\n10,20,1.5\n\n3,4,2 # trailing\n10,20,9\n", &warnings);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == SparsePoint{10, 20, 1.5});
  CHECK(p[1] == SparsePoint{3, 4, 2.0});
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("line 5") != std::string::npos);

  CHECK(code_of([] { parse_sparse_csv("10,20,-1\n"); }) == ErrorCode::kNonPositiveDepth);
  try {
    parse_sparse_csv("1,2,3\n1,x,3\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kParseError);
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK(code_of([] { parse_sparse_csv("1,2\n"); }) == ErrorCode::kParseError);

  TempDir dir;
  const SparsePoints pts{{1, 2, 0.1}, {5, 6, 1.0 / 3.0}};
  write_sparse_csv(pts, dir / "s.csv");
  CHECK(read_sparse_csv(dir / "s.csv") == pts);
}

TEST_CASE("manifest") {
  TempDir dir;
  for (const char* f : {"g0.png", "p0.pfm", "s0.csv", "g1.png"}) testutil::write_bytes(dir / f, {0});
  const std::string text =
      "# mvid-manifest encoding=q8.8\n"
      "# id\trgb\tgt\tpred\tsparse\tprofile\n"
      "a\t-\tg0.png\tp0.pfm\ts0.csv\tvoid\n"
      "b\t-\tg1.png\t-\t-\ttartanair\n";
  testutil::write_bytes(dir / "m.tsv", {text.begin(), text.end()});
  const auto m = read_manifest(dir / "m.tsv");
  CHECK(m.encoding == DepthEncoding::kQ8_8);
  REQUIRE(m.records.size() == 2);
  CHECK(m.records[0].id == "a");
  CHECK(m.records[0].gt == dir / "g0.png");
  CHECK(*m.records[0].pred == dir / "p0.pfm");
  CHECK_FALSE(m.records[1].pred.has_value());
  CHECK(m.records[1].profile == "tartanair");

  write_manifest(m, dir / "m2.tsv");
  CHECK(read_manifest(dir / "m2.tsv").records == m.records);
  const auto again = testutil::read_bytes(dir / "m2.tsv");
  CHECK(std::string(again.begin(), again.end()) == text);

  const std::string dup = "# id\trgb\tgt\tpred\tsparse\tprofile\na\t-\tg0.png\t-\t-\tvoid\na\t-\tg1.png\t-\t-\tvoid\n";
  CHECK(code_of([&] { parse_manifest(dup, dir.path()); }) == ErrorCode::kParseError);
  const std::string missing = "# id\trgb\tgt\tpred\tsparse\tprofile\nz\t-\tnope.png\t-\t-\tvoid\n";
  testutil::write_bytes(dir / "bad.tsv", {missing.begin(), missing.end()});
  CHECK(code_of([&] { read_manifest(dir / "bad.tsv"); }) == ErrorCode::kIoFailure);
  CHECK(code_of([&] { parse_manifest("a\tb\n", dir.path()); }) == ErrorCode::kParseError);
}

TEST_CASE("training config file") {
  const auto c = parse_training_config(
      "# comment\nlr = 0.001\nepochs=3\nstage_widths=8,16,32,64\nregress_shift=true\n"
      "extra_confidence=1\n");
  CHECK(c.train.lr == 0.001);
  CHECK(c.train.epochs == 3);
  CHECK(c.train.batch == TrainConfig{}.batch);
  CHECK(c.sml.stage_widths == std::array<int, 4>{8, 16, 32, 64});
  CHECK(c.sml.regress_shift);
  CHECK(c.sml.extra.confidence);
  const auto again = parse_training_config(format_training_config(c));
  CHECK(again.train.lr == c.train.lr);
  CHECK(again.sml == c.sml);
  CHECK(code_of([] { parse_training_config("bogus=1\n"); }) == ErrorCode::kParseError);
  CHECK(code_of([] { parse_training_config("epochs=abc\n"); }) == ErrorCode::kParseError);
  CHECK(code_of([] { parse_training_config("epochs=0\n"); }) == ErrorCode::kParseError);
}

TEST_CASE("checkpoint round trip is bit exact") {
  SmlConfig c;
  c.stage_widths = {4, 8, 8, 16};
  c.regress_shift = true;
  c.extra.gradients = true;
  auto w = SmlWeights::initialize(c, 77, false);
  w.values[3] = -0.0f;
  w.values[5] = std::numeric_limits<float>::denorm_min();
  const auto bytes = serialize_checkpoint(w);
  const auto back = deserialize_checkpoint(bytes);
  CHECK(back.config == w.config);
  REQUIRE(back.values.size() == w.values.size());
  CHECK(std::memcmp(back.values.data(), w.values.data(), w.values.size() * sizeof(float)) == 0);
  CHECK(serialize_checkpoint(back) == bytes);

  TempDir dir;
  write_checkpoint(w, dir / "w.smlw");
  CHECK(read_checkpoint(dir / "w.smlw").values == w.values);
}

TEST_CASE("checkpoint corruption") {
  const auto w = SmlWeights::initialize(SmlConfig{}, 1);
  const auto bytes = serialize_checkpoint(w);

  auto magic = bytes;
  magic[0] = 'X';
  CHECK(code_of([&] { deserialize_checkpoint(magic); }) == ErrorCode::kBadMagic);

  auto version = bytes;
  version[4] = 9;
  CHECK(code_of([&] { deserialize_checkpoint(version); }) == ErrorCode::kVersionMismatch);

  for (std::size_t cut : {std::size_t{10}, std::size_t{60}, bytes.size() / 2, bytes.size() - 1}) {
    const std::vector<std::uint8_t> trunc(bytes.begin(), bytes.begin() + static_cast<long>(cut));
    CHECK(code_of([&] { deserialize_checkpoint(trunc); }) == ErrorCode::kCorruptDirectory);
  }

  // Corrupt the first tensor's byte offset (after the header and its name).
  auto offset = bytes;
  const std::size_t name_len = w.layout[0].name.size();
  const std::size_t off_pos = 4 + 4 + 4 + 16 + 4 + 4 + 4 + 4 + name_len + 4 + 4 * w.layout[0].dims.size();
  offset[off_pos] = 8;
  CHECK(code_of([&] { deserialize_checkpoint(offset); }) == ErrorCode::kCorruptDirectory);
}

TEST_CASE("error map colours") {
  InverseDepthMap gt(3, 1, 1000.0 / 2.0);
  InverseDepthMap same = gt;
  ValidMask all(3, 1, 1);
  const auto white = error_map_image(same, gt, all);
  for (const auto& p : white.values()) CHECK(p == Rgb8{255, 255, 255});

  InverseDepthMap farther(3, 1, 1000.0 / 2.5);  // smaller inverse depth: e > 0
  const auto red = error_map_image(farther, gt, all);
  for (const auto& p : red.values()) CHECK(p == Rgb8{255, 0, 0});
  InverseDepthMap closer(3, 1, 1000.0 / 1.5);
  const auto blue = error_map_image(closer, gt, all);
  for (const auto& p : blue.values()) CHECK(p == Rgb8{0, 0, 255});

  ValidMask none(3, 1, 0);
  const auto black = error_map_image(farther, gt, none);
  for (const auto& p : black.values()) CHECK(p == Rgb8{0, 0, 0});
}

TEST_CASE("depth map rendering") {
  DepthFrame uniform(3, 2, 2.0);
  const auto u = depth_map_image(uniform);
  for (const auto& p : u.values()) CHECK(p == u[0]);

  DepthFrame two(3, 1, std::vector<double>{1.0, 4.0, 0.0});
  const auto t = depth_map_image(two);
  CHECK(t[0][0] > t[1][0]);
  CHECK(t[2] == Rgb8{0, 0, 0});
}

TEST_CASE("writers are byte deterministic") {
  TempDir dir;
  DepthFrame f(7, 5, 1.234);
  f[2] = 0.0;
  InverseDepthMap z(7, 5, 0.5);
  z[3] = 0.25;
  for (int k = 0; k < 2; ++k) {
    const std::string s = std::to_string(k);
    write_depth_png(f, dir / ("d" + s + ".png"), DepthEncoding::kMillimeters);
    write_inverse_pfm(z, dir / ("z" + s + ".pfm"));
    render_depth_map(f, dir / ("r" + s + ".png"));
    render_error_map(z, InverseDepthMap(7, 5, 0.4), ValidMask(7, 5, 1), dir / ("e" + s + ".png"));
    write_checkpoint(SmlWeights::initialize(SmlConfig{}, 3), dir / ("w" + s + ".smlw"));
  }
  for (const char* stem : {"d", "z", "r", "e", "w"}) {
    const std::string ext = std::string(stem) == "z" ? ".pfm" : std::string(stem) == "w" ? ".smlw" : ".png";
    CHECK(testutil::read_bytes(dir / (std::string(stem) + "0" + ext)) ==
          testutil::read_bytes(dir / (std::string(stem) + "1" + ext)));
  }
}
