#include "mvid/losses.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mvid {
namespace {

double sign(double x) { return (x > 0.0) - (x < 0.0); }

struct Level {
  int w = 0;
  int h = 0;
  std::vector<double> r;
  std::vector<std::uint8_t> m;
  std::size_t valid = 0;
};

std::vector<Level> build_pyramid(std::span<const double> z_hat, std::span<const double> z_star,
                                 std::span<const std::uint8_t> mask, int width, int height,
                                 int levels) {
  std::vector<Level> pyr(static_cast<std::size_t>(levels));
  Level& base = pyr[0];
  base.w = width;
  base.h = height;
  base.r.resize(z_hat.size());
  base.m.assign(mask.begin(), mask.end());
  for (std::size_t i = 0; i < z_hat.size(); ++i) {
    base.r[i] = mask[i] ? z_star[i] - z_hat[i] : 0.0;
    base.valid += mask[i] != 0;
  }
  for (int k = 1; k < levels; ++k) {
    const Level& src = pyr[k - 1];
    Level& dst = pyr[k];
    dst.w = src.w / 2;
    dst.h = src.h / 2;
    dst.r.assign(static_cast<std::size_t>(dst.w) * dst.h, 0.0);
    dst.m.assign(dst.r.size(), 0);
    for (int y = 0; y < dst.h; ++y) {
      for (int x = 0; x < dst.w; ++x) {
        const std::size_t a = static_cast<std::size_t>(2 * y) * src.w + 2 * x;
        const std::size_t b = a + static_cast<std::size_t>(src.w);
        const std::size_t o = static_cast<std::size_t>(y) * dst.w + x;
        dst.r[o] = 0.25 * (src.r[a] + src.r[a + 1] + src.r[b] + src.r[b + 1]);
        dst.m[o] = src.m[a] && src.m[a + 1] && src.m[b] && src.m[b + 1];
        dst.valid += dst.m[o] != 0;
      }
    }
  }
  return pyr;
}

// Sum of |forward differences| at one level; optionally accumulates
// d(sum)/dR scaled by `scale` into grad.
double level_gradient_sum(const Level& lv, double scale, std::vector<double>* grad) {
  double sum = 0.0;
  for (int y = 0; y < lv.h; ++y) {
    for (int x = 0; x < lv.w; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * lv.w + x;
      if (!lv.m[i]) continue;
      if (x + 1 < lv.w && lv.m[i + 1]) {
        const double d = lv.r[i + 1] - lv.r[i];
        sum += std::abs(d);
        if (grad) {
          (*grad)[i + 1] += scale * sign(d);
          (*grad)[i] -= scale * sign(d);
        }
      }
      if (y + 1 < lv.h && lv.m[i + lv.w]) {
        const double d = lv.r[i + lv.w] - lv.r[i];
        sum += std::abs(d);
        if (grad) {
          (*grad)[i + lv.w] += scale * sign(d);
          (*grad)[i] -= scale * sign(d);
        }
      }
    }
  }
  return sum;
}

void check_sizes(std::span<const double> z_hat, std::span<const double> z_star,
                 std::span<const std::uint8_t> mask, int width, int height) {
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  if (z_hat.size() != n || z_star.size() != n || mask.size() != n) {
    fail(ErrorCode::kShapeMismatch, "loss inputs differ in size");
  }
}

void hash_sign(std::uint64_t& h, double x) {
  h ^= static_cast<std::uint64_t>(sign(x) + 2.0);
  h *= 1099511628211ull;
}

}  // namespace

std::uint64_t loss_branch_signature(std::span<const double> z_hat, std::span<const double> z_star,
                                    std::span<const std::uint8_t> mask, int width, int height,
                                    int levels) {
  check_sizes(z_hat, z_star, mask, width, height);
  const auto pyr = build_pyramid(z_hat, z_star, mask, width, height, std::max(levels, 1));
  std::uint64_t h = 1469598103934665603ull;
  for (const auto& lv : pyr) {
    for (int y = 0; y < lv.h; ++y) {
      for (int x = 0; x < lv.w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * lv.w + x;
        if (!lv.m[i]) continue;
        hash_sign(h, lv.r[i]);
        if (x + 1 < lv.w && lv.m[i + 1]) hash_sign(h, lv.r[i + 1] - lv.r[i]);
        if (y + 1 < lv.h && lv.m[i + lv.w]) hash_sign(h, lv.r[i + lv.w] - lv.r[i]);
      }
    }
  }
  return h;
}

double loss_depth(const InverseDepthMap& z_hat, const InverseDepthMap& z_star,
                  const ValidMask& mask) {
  require_same_shape(z_hat, z_star, "loss_depth");
  require_same_shape(z_hat, mask, "loss_depth mask");
  double sum = 0.0;
  std::size_t m = 0;
  for (std::size_t i = 0; i < z_hat.size(); ++i) {
    if (!mask[i]) continue;
    sum += std::abs(z_star[i] - z_hat[i]);
    ++m;
  }
  if (m == 0) fail(ErrorCode::kEmptyMask, "loss_depth over an empty mask");
  return sum / static_cast<double>(m);
}

double loss_grad(const InverseDepthMap& z_hat, const InverseDepthMap& z_star,
                 const ValidMask& mask, int levels) {
  require_same_shape(z_hat, z_star, "loss_grad");
  require_same_shape(z_hat, mask, "loss_grad mask");
  if (levels < 1) fail(ErrorCode::kInvalidArgument, "loss_grad needs at least one level");
  const auto pyr = build_pyramid(z_hat.values(), z_star.values(), mask.values(), z_hat.width(),
                                 z_hat.height(), levels);
  if (pyr[0].valid == 0) fail(ErrorCode::kEmptyMask, "loss_grad over an empty mask");
  double total = 0.0;
  for (const auto& lv : pyr) {
    if (lv.valid == 0) continue;
    total += level_gradient_sum(lv, 0.0, nullptr) / static_cast<double>(lv.valid);
  }
  return total / levels;
}

LossTerms loss_total(const InverseDepthMap& z_hat, const InverseDepthMap& z_star,
                     const ValidMask& mask, const LossConfig& config) {
  LossTerms t;
  t.depth = loss_depth(z_hat, z_star, mask);
  t.grad = loss_grad(z_hat, z_star, mask, config.pyramid_levels);
  t.total = t.depth + config.grad_weight * t.grad;
  return t;
}

LossTerms loss_total_with_gradient(std::span<const double> z_hat, std::span<const double> z_star,
                                   std::span<const std::uint8_t> mask, int width, int height,
                                   const LossConfig& config, std::span<double> d_z_hat) {
  check_sizes(z_hat, z_star, mask, width, height);
  if (d_z_hat.size() != z_hat.size()) fail(ErrorCode::kShapeMismatch, "gradient buffer size");
  if (config.pyramid_levels < 1) fail(ErrorCode::kInvalidArgument, "pyramid_levels must be >= 1");

  auto pyr = build_pyramid(z_hat, z_star, mask, width, height, config.pyramid_levels);
  if (pyr[0].valid == 0) fail(ErrorCode::kEmptyMask, "training loss over an empty mask");
  const double m0 = static_cast<double>(pyr[0].valid);

  LossTerms t;
  std::fill(d_z_hat.begin(), d_z_hat.end(), 0.0);
  for (std::size_t i = 0; i < z_hat.size(); ++i) {
    if (!mask[i]) continue;
    const double r = z_star[i] - z_hat[i];
    t.depth += std::abs(r);
    d_z_hat[i] = -sign(r) / m0;
  }
  t.depth /= m0;

  // dL_grad/dR per level, then pushed down through the average pooling.
  const int levels = config.pyramid_levels;
  std::vector<std::vector<double>> dr(pyr.size());
  for (std::size_t k = 0; k < pyr.size(); ++k) {
    dr[k].assign(pyr[k].r.size(), 0.0);
    if (pyr[k].valid == 0) continue;
    const double scale = 1.0 / (static_cast<double>(levels) * static_cast<double>(pyr[k].valid));
    t.grad += level_gradient_sum(pyr[k], scale, &dr[k]) * scale;
  }
  for (std::size_t k = pyr.size() - 1; k >= 1; --k) {
    const Level& fine = pyr[k - 1];
    const Level& coarse = pyr[k];
    for (int y = 0; y < coarse.h; ++y) {
      for (int x = 0; x < coarse.w; ++x) {
        const double g = 0.25 * dr[k][static_cast<std::size_t>(y) * coarse.w + x];
        if (g == 0.0) continue;
        const std::size_t a = static_cast<std::size_t>(2 * y) * fine.w + 2 * x;
        const std::size_t b = a + static_cast<std::size_t>(fine.w);
        dr[k - 1][a] += g;
        dr[k - 1][a + 1] += g;
        dr[k - 1][b] += g;
        dr[k - 1][b + 1] += g;
      }
    }
  }
  for (std::size_t i = 0; i < z_hat.size(); ++i) {
    if (mask[i]) d_z_hat[i] -= config.grad_weight * dr[0][i];
  }

  t.total = t.depth + config.grad_weight * t.grad;
  return t;
}

}  // namespace mvid
