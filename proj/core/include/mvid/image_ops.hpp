#pragma once

#include <span>

#include "mvid/depth.hpp"

namespace mvid {

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
  bool operator==(const Rgb&) const = default;
};

using RgbImage = Grid<Rgb>;     // channels in [0, 1]
using GrayImage = Grid<double>;  // luminance in [0, 1]

// Values in [0, 1]; 0 everywhere when there are no sparse points.
struct ConfidenceMap : Grid<double> {
  using Grid<double>::Grid;
};

// Reflect-101 index into [0, n): -1 -> 1, n -> n - 2.
int reflect_index(int i, int n) noexcept;

// 0.299 R + 0.587 G + 0.114 B
GrayImage grayscale(const RgbImage& rgb);

// Scharr gradient magnitude normalised by its maximum (all zeros for a
// constant image). Reflect-101 borders.
GrayImage scharr_gradients(const GrayImage& gray);

inline constexpr int kConfidenceDiskRadius = 3;  // 7x7 disk
inline constexpr int kConfidenceBlurSize = 5;
inline constexpr double kConfidenceBlurSigma = 1.0;

// Impulses at the sparse pixels, dilated with a 7x7 disk, then blurred with a
// normalised 5x5 Gaussian.
ConfidenceMap confidence_map(std::span<const SparsePoint> sparse, int width, int height);

}  // namespace mvid
