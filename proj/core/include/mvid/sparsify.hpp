#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "mvid/depth.hpp"
#include "mvid/image_ops.hpp"

namespace mvid {

enum class SparsifierMode { kMinDistance, kClustered };

SparsifierMode parse_sparsifier_mode(std::string_view name);
std::string_view sparsifier_mode_name(SparsifierMode mode) noexcept;

inline constexpr std::array<int, 4> kDensityPresets{50, 150, 500, 1500};

struct SparsifierConfig {
  SparsifierMode mode = SparsifierMode::kMinDistance;
  int target_count = 150;
  double min_dist = 4.0;        // pixels, min-distance mode
  int cluster_count = 8;        // clustered mode
  double cluster_sigma = 6.0;   // pixels, clustered mode
  double depth_noise = 0.0;     // relative std of multiplicative depth noise; 0 = exact gt
  std::uint64_t seed = 0;

  void validate() const;
};

// Feature-tracker stand-in: candidates are visited in a random order biased
// towards high texture score (weighted random permutation), and a candidate is
// accepted when it keeps at least min_dist to every accepted point. `texture`
// defaults to the Scharr magnitude of the depth map when absent.
SparsePoints sample_min_distance(const DepthFrame& gt, const SparsifierConfig& cfg,
                                 const GrayImage* texture = nullptr);

// Points drawn from isotropic Gaussians around uniformly chosen valid centers.
SparsePoints sample_clustered(const DepthFrame& gt, const SparsifierConfig& cfg);

// Dispatches on cfg.mode. For min-distance the texture score is the Scharr
// magnitude of the rgb's luminance when rgb is given.
SparsePoints sparsify(const DepthFrame& gt, const SparsifierConfig& cfg,
                      const RgbImage* rgb = nullptr);

}  // namespace mvid
