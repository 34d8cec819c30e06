#pragma once

#include <cstddef>
#include <span>

#include "mvid/depth.hpp"

namespace mvid {

// Per-frame scale and shift mapping predicted inverse depth onto metric
// inverse depth: z_aligned = scale * z + shift.
struct AffineAlignment {
  double scale = 1.0;
  double shift = 0.0;  // 1/m
  std::size_t n_points = 0;
  bool degenerate = false;  // scale-only fallback was used
};

// Relative determinant threshold below which the two-parameter fit is
// considered ill-conditioned.
inline constexpr double kDeterminantEpsilon = 1e-12;

// Least-squares fit of y ~ scale * z + shift. Accumulates in double.
AffineAlignment fit_affine(std::span<const double> z, std::span<const double> y);

// Samples `pred` at every sparse pixel and fits against 1/depth.
AffineAlignment fit_global(const InverseDepthMap& pred, std::span<const SparsePoint> sparse);

InverseDepthMap apply_global(const InverseDepthMap& pred, const AffineAlignment& alignment,
                             const ClampProfile& profile);

}  // namespace mvid
