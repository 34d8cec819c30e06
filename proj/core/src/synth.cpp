#include "mvid/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>

namespace mvid {

void SceneConfig::validate() const {
  if (width <= 0 || height <= 0) fail(ErrorCode::kInvalidArgument, "scene dims must be > 0");
  if (!(depth_min > 0.0 && depth_min < depth_max)) {
    fail(ErrorCode::kInvalidArgument, "scene requires 0 < depth_min < depth_max");
  }
  if (blob_count < 0) fail(ErrorCode::kInvalidArgument, "blob_count must be >= 0");
}

namespace {

// Bilinearly interpolated random lattice, values in [0, 1].
Grid<double> value_noise(int width, int height, int cells, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int n = cells + 1;
  std::vector<double> lattice(static_cast<std::size_t>(n) * n);
  for (auto& v : lattice) v = unif(rng);
  Grid<double> out(width, height);
  for (int y = 0; y < height; ++y) {
    const double fy = (y + 0.5) / height * cells;
    const int iy = std::min(static_cast<int>(fy), cells - 1);
    const double ty = fy - iy;
    for (int x = 0; x < width; ++x) {
      const double fx = (x + 0.5) / width * cells;
      const int ix = std::min(static_cast<int>(fx), cells - 1);
      const double tx = fx - ix;
      auto at = [&](int a, int b) { return lattice[static_cast<std::size_t>(b) * n + a]; };
      const double top = at(ix, iy) * (1 - tx) + at(ix + 1, iy) * tx;
      const double bot = at(ix, iy + 1) * (1 - tx) + at(ix + 1, iy + 1) * tx;
      out(x, y) = top * (1 - ty) + bot * ty;
    }
  }
  return out;
}

}  // namespace

SyntheticScene synth_scene(const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double lo = cfg.depth_min, hi = cfg.depth_max, span = hi - lo;

  const double base = lo + span * (0.35 + 0.3 * unif(rng));
  const double slope_x = span * (unif(rng) - 0.5) * 0.8;
  const double slope_y = span * (unif(rng) - 0.5) * 0.8;

  struct Blob {
    double cx, cy, sigma, amplitude;
  };
  std::vector<Blob> blobs;
  for (int k = 0; k < cfg.blob_count; ++k) {
    Blob b;
    b.cx = unif(rng) * cfg.width;
    b.cy = unif(rng) * cfg.height;
    b.sigma = (0.06 + 0.14 * unif(rng)) * std::min(cfg.width, cfg.height);
    b.amplitude = span * (unif(rng) - 0.6) * 0.7;
    blobs.push_back(b);
  }

  SyntheticScene scene{RgbImage(cfg.width, cfg.height), DepthFrame(cfg.width, cfg.height)};
  for (int v = 0; v < cfg.height; ++v) {
    for (int u = 0; u < cfg.width; ++u) {
      double d = base + slope_x * (static_cast<double>(u) / cfg.width - 0.5) +
                 slope_y * (static_cast<double>(v) / cfg.height - 0.5);
      for (const auto& b : blobs) {
        const double dx = u - b.cx, dy = v - b.cy;
        d += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
      }
      scene.gt(u, v) = std::clamp(d, lo, hi);
    }
  }

  const Grid<double> coarse = value_noise(cfg.width, cfg.height, 6, rng);
  const Grid<double> fine = value_noise(cfg.width, cfg.height, std::max(2, cfg.width / 6), rng);
  const double tint_r = 0.6 + 0.4 * unif(rng);
  const double tint_g = 0.6 + 0.4 * unif(rng);
  const double tint_b = 0.6 + 0.4 * unif(rng);
  for (std::size_t i = 0; i < scene.gt.size(); ++i) {
    const double shade = (1.0 / scene.gt[i] - 1.0 / hi) / (1.0 / lo - 1.0 / hi);
    const double tex = 0.5 * coarse[i] + 0.5 * fine[i];
    const double lum = std::clamp(0.15 + 0.45 * shade + 0.4 * tex, 0.0, 1.0);
    scene.rgb[i] = {std::clamp(lum * tint_r, 0.0, 1.0), std::clamp(lum * tint_g, 0.0, 1.0),
                    std::clamp(lum * tint_b, 0.0, 1.0)};
  }
  return scene;
}

SyntheticPrediction synth_prediction(const InverseDepthMap& gt_inv, std::uint64_t seed,
                                     const PredictionDistortion& distortion) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const int w = gt_inv.width(), h = gt_inv.height();

  SyntheticPrediction out;
  // Log-uniform scale in [0.3, 3].
  const double a_draw = 0.3 * std::pow(10.0, unif(rng));
  const double b_draw = -0.2 + 0.4 * unif(rng);
  out.scale = distortion.scale.value_or(a_draw);

  double z_min = 0.0;
  for (double z : gt_inv.values()) {
    if (z > 0.0 && (z_min == 0.0 || z < z_min)) z_min = z;
  }
  out.shift = distortion.shift.value_or(std::max(b_draw, -0.4 * out.scale * z_min));

  out.field = Grid<double>(w, h, 1.0);
  if (distortion.local_field) {
    struct Wave {
      double fx, fy, phase, amp;
    };
    std::array<Wave, 3> waves{};
    for (auto& wv : waves) {
      const double freq = 0.3 + 1.2 * unif(rng);
      const double angle = 2.0 * std::numbers::pi * unif(rng);
      wv = {freq * std::cos(angle), freq * std::sin(angle), 2.0 * std::numbers::pi * unif(rng),
            0.5 + 0.5 * unif(rng)};
    }
    Grid<double> noise(w, h, 0.0);
    double peak = 0.0;
    for (int v = 0; v < h; ++v) {
      for (int u = 0; u < w; ++u) {
        double n = 0.0;
        for (const auto& wv : waves) {
          n += wv.amp * std::cos(2.0 * std::numbers::pi *
                                     (wv.fx * u / std::max(1, w) + wv.fy * v / std::max(1, h)) +
                                 wv.phase);
        }
        noise(u, v) = n;
        peak = std::max(peak, std::abs(n));
      }
    }
    const double log_max = std::log(1.25);
    for (std::size_t i = 0; i < noise.size(); ++i) {
      const double n = peak > 0.0 ? noise[i] / peak : 0.0;
      out.field[i] = std::clamp(std::exp(log_max * n), 0.8, 1.25);
    }
  }

  out.z = InverseDepthMap(w, h);
  for (std::size_t i = 0; i < gt_inv.size(); ++i) {
    out.z[i] = std::max(0.0, out.scale * gt_inv[i] * out.field[i] + out.shift);
  }
  return out;
}

}  // namespace mvid
