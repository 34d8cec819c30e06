#pragma once

#include <filesystem>

#include "mvid/depth.hpp"
#include "mvid/png_io.hpp"

namespace mvid {

// e = z_star - z_hat on the mask. Red for e > 0 (prediction farther), blue for
// e < 0, white at 0, saturating at the 99th percentile of |e|. Off-mask
// pixels are black.
Rgb8Image error_map_image(const InverseDepthMap& z_hat, const InverseDepthMap& z_star,
                          const ValidMask& mask);
void render_error_map(const InverseDepthMap& z_hat, const InverseDepthMap& z_star,
                      const ValidMask& mask, const std::filesystem::path& path);

// Gray levels from inverse depth normalised over valid pixels; brighter is
// closer, invalid pixels black.
Rgb8Image depth_map_image(const DepthFrame& frame);
void render_depth_map(const DepthFrame& frame, const std::filesystem::path& path);

}  // namespace mvid
