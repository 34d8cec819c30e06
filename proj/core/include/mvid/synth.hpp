#pragma once

#include <cstdint>
#include <optional>

#include "mvid/depth.hpp"
#include "mvid/image_ops.hpp"

namespace mvid {

struct SceneConfig {
  int width = 96;
  int height = 96;
  double depth_min = 0.5;  // meters
  double depth_max = 4.5;
  int blob_count = 6;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SyntheticScene {
  RgbImage rgb;
  DepthFrame gt;
};

// Inclined plane plus smooth radial bumps, clipped to the depth range; rgb is
// shaded inverse depth over seeded texture.
SyntheticScene synth_scene(const SceneConfig& cfg);

struct PredictionDistortion {
  bool local_field = true;        // multiplicative low-frequency field in [0.8, 1.25]
  std::optional<double> scale;    // overrides the seeded a in [0.3, 3]
  std::optional<double> shift;    // overrides the seeded b in [-0.2, 0.2] 1/m
};

struct SyntheticPrediction {
  InverseDepthMap z;
  double scale = 1.0;
  double shift = 0.0;
  Grid<double> field;  // m(u, v)
};

// z = a * z_gt * m(u, v) + b, floored at 0. The seeded shift is kept above
// -0.4 * a * min(z_gt) so valid pixels stay positive.
SyntheticPrediction synth_prediction(const InverseDepthMap& gt_inv, std::uint64_t seed,
                                     const PredictionDistortion& distortion = {});

}  // namespace mvid
