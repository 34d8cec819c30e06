#include "mvid/image_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace mvid {

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

GrayImage grayscale(const RgbImage& rgb) {
  GrayImage gray(rgb.width(), rgb.height());
  for (std::size_t i = 0; i < rgb.size(); ++i) {
    const Rgb& p = rgb[i];
    gray[i] = 0.299 * p.r + 0.587 * p.g + 0.114 * p.b;
  }
  return gray;
}

GrayImage scharr_gradients(const GrayImage& gray) {
  const int w = gray.width();
  const int h = gray.height();
  GrayImage mag(w, h, 0.0);
  if (gray.empty()) return mag;

  // Gx = [-3 0 3; -10 0 10; -3 0 3] / 32, Gy is its transpose.
  constexpr std::array<double, 3> smooth{3.0, 10.0, 3.0};
  double peak = 0.0;
  for (int v = 0; v < h; ++v) {
    const int vm = reflect_index(v - 1, h), vp = reflect_index(v + 1, h);
    for (int u = 0; u < w; ++u) {
      const int um = reflect_index(u - 1, w), up = reflect_index(u + 1, w);
      const std::array<int, 3> rows{vm, v, vp};
      const std::array<int, 3> cols{um, u, up};
      double gx = 0.0, gy = 0.0;
      for (int k = 0; k < 3; ++k) {
        gx += smooth[k] * (gray(up, rows[k]) - gray(um, rows[k]));
        gy += smooth[k] * (gray(cols[k], vp) - gray(cols[k], vm));
      }
      gx /= 32.0;
      gy /= 32.0;
      const double m = std::sqrt(gx * gx + gy * gy);
      mag(u, v) = m;
      peak = std::max(peak, m);
    }
  }
  if (peak > 0.0) {
    for (auto& m : mag.values()) m /= peak;
  }
  return mag;
}

ConfidenceMap confidence_map(std::span<const SparsePoint> sparse, int width, int height) {
  ConfidenceMap out(width, height, 0.0);
  if (sparse.empty()) return out;

  Grid<double> dilated(width, height, 0.0);
  constexpr int r = kConfidenceDiskRadius;
  for (const auto& p : sparse) {
    if (!dilated.contains(p.u, p.v)) continue;
    for (int dv = -r; dv <= r; ++dv) {
      for (int du = -r; du <= r; ++du) {
        if (du * du + dv * dv > r * r) continue;
        if (dilated.contains(p.u + du, p.v + dv)) dilated(p.u + du, p.v + dv) = 1.0;
      }
    }
  }

  constexpr int half = kConfidenceBlurSize / 2;
  std::array<double, kConfidenceBlurSize> kernel{};
  double sum = 0.0;
  for (int i = 0; i < kConfidenceBlurSize; ++i) {
    const double x = i - half;
    kernel[i] = std::exp(-x * x / (2.0 * kConfidenceBlurSigma * kConfidenceBlurSigma));
    sum += kernel[i];
  }
  for (auto& k : kernel) k /= sum;

  // Separable: the 2D kernel is the outer product of the normalised 1D one.
  Grid<double> horizontal(width, height, 0.0);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      double acc = 0.0;
      for (int i = 0; i < kConfidenceBlurSize; ++i) {
        acc += kernel[i] * dilated(reflect_index(u + i - half, width), v);
      }
      horizontal(u, v) = acc;
    }
  }
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      double acc = 0.0;
      for (int i = 0; i < kConfidenceBlurSize; ++i) {
        acc += kernel[i] * horizontal(u, reflect_index(v + i - half, height));
      }
      out(u, v) = std::clamp(acc, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace mvid
