#include "mvid/render.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mvid {

namespace {

std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
}

}  // namespace

Rgb8Image error_map_image(const InverseDepthMap& z_hat, const InverseDepthMap& z_star,
                          const ValidMask& mask) {
  require_same_shape(z_hat, z_star, "error map");
  require_same_shape(z_hat, mask, "error map mask");

  std::vector<double> magnitudes;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) magnitudes.push_back(std::abs(z_star[i] - z_hat[i]));
  }
  double range = 0.0;
  if (!magnitudes.empty()) {
    // Nearest-rank 99th percentile.
    const std::size_t rank = static_cast<std::size_t>(
        std::ceil(0.99 * static_cast<double>(magnitudes.size())));
    const std::size_t k = std::max<std::size_t>(rank, 1) - 1;
    std::nth_element(magnitudes.begin(), magnitudes.begin() + static_cast<std::ptrdiff_t>(k),
                     magnitudes.end());
    range = magnitudes[k];
  }

  Rgb8Image out(mask.width(), mask.height(), Rgb8{0, 0, 0});
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const double e = z_star[i] - z_hat[i];
    const double t = range > 0.0 ? std::clamp(e / range, -1.0, 1.0) : 0.0;
    const std::uint8_t fade = to_byte(1.0 - std::abs(t));
    out[i] = t >= 0.0 ? Rgb8{255, fade, fade} : Rgb8{fade, fade, 255};
  }
  return out;
}

void render_error_map(const InverseDepthMap& z_hat, const InverseDepthMap& z_star,
                      const ValidMask& mask, const std::filesystem::path& path) {
  write_rgb8_png(error_map_image(z_hat, z_star, mask), path);
}

Rgb8Image depth_map_image(const DepthFrame& frame) {
  double lo = 0.0, hi = 0.0;
  bool any = false;
  for (double d : frame.values()) {
    if (!is_valid_depth(d)) continue;
    const double z = 1.0 / d;
    lo = any ? std::min(lo, z) : z;
    hi = any ? std::max(hi, z) : z;
    any = true;
  }
  // Valid pixels span [0.1, 1] so the farthest one stays distinguishable from
  // invalid black.
  Rgb8Image out(frame.width(), frame.height(), Rgb8{0, 0, 0});
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (!is_valid_depth(frame[i])) continue;
    const double t = hi > lo ? (1.0 / frame[i] - lo) / (hi - lo) : 1.0;
    const std::uint8_t g = to_byte(0.1 + 0.9 * t);
    out[i] = {g, g, g};
  }
  return out;
}

void render_depth_map(const DepthFrame& frame, const std::filesystem::path& path) {
  write_rgb8_png(depth_map_image(frame), path);
}

}  // namespace mvid
