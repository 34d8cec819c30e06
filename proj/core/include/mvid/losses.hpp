#pragma once

#include <span>

#include "mvid/depth.hpp"

namespace mvid {

inline constexpr int kDefaultPyramidLevels = 3;
inline constexpr double kDefaultGradLossWeight = 0.5;

struct LossConfig {
  int pyramid_levels = kDefaultPyramidLevels;
  double grad_weight = kDefaultGradLossWeight;
};

struct LossTerms {
  double depth = 0.0;
  double grad = 0.0;
  double total = 0.0;
};

// Mean absolute inverse-depth error over the mask. Throws kEmptyMask.
double loss_depth(const InverseDepthMap& z_hat, const InverseDepthMap& z_star,
                  const ValidMask& mask);

// Multiscale gradient matching on R = z* - z_hat: levels are formed by 2x2
// average pooling (and AND-pooling of the mask); forward differences count
// only where both pixels are valid. A level with no valid pixels adds 0.
double loss_grad(const InverseDepthMap& z_hat, const InverseDepthMap& z_star,
                 const ValidMask& mask, int levels);

LossTerms loss_total(const InverseDepthMap& z_hat, const InverseDepthMap& z_star,
                     const ValidMask& mask, const LossConfig& config);

// Loss value plus d(total)/d(z_hat) for every pixel (0 off the mask). The
// subgradient of |x| at 0 is taken as 0.
LossTerms loss_total_with_gradient(std::span<const double> z_hat, std::span<const double> z_star,
                                   std::span<const std::uint8_t> mask, int width, int height,
                                   const LossConfig& config, std::span<double> d_z_hat);

// Hash of the sign of every |.| argument in the loss; equal signatures mean
// the loss is linear in z_hat between the two evaluations.
std::uint64_t loss_branch_signature(std::span<const double> z_hat, std::span<const double> z_star,
                                    std::span<const std::uint8_t> mask, int width, int height,
                                    int levels);

}  // namespace mvid
