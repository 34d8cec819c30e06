#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mvid/depth.hpp"

namespace mvid {

// Depth errors in mm, inverse-depth errors in 1/km.
struct FrameMetrics {
  std::string frame_id;
  double mae_mm = 0.0;
  double rmse_mm = 0.0;
  double imae = 0.0;
  double irmse = 0.0;
  double iabsrel = 0.0;
  std::size_t valid_pixels = 0;

  // Raw sums kept for pooled-pixel aggregation.
  double sum_abs_mm = 0.0;
  double sum_sq_mm = 0.0;
  double sum_abs_inv = 0.0;
  double sum_sq_inv = 0.0;
  double sum_rel_inv = 0.0;
};

enum class Pooling { kMeanOfFrames, kPooledPixels };

struct AggregateReport {
  double mae_mm = 0.0;
  double rmse_mm = 0.0;
  double imae = 0.0;
  double irmse = 0.0;
  double iabsrel = 0.0;
  std::size_t frames = 0;
  std::size_t skipped_frames = 0;  // frames whose eval mask was empty
  std::string profile;
  int density = 0;  // sparse points per frame requested, 0 when unknown
  Pooling pooling = Pooling::kMeanOfFrames;
};

struct MetricReduction {
  double mae_mm = 0.0;
  double rmse_mm = 0.0;
  double imae = 0.0;
  double irmse = 0.0;
  double iabsrel = 0.0;
};

// Throws kEmptyMask when no gt pixel lies inside the profile's eval range and
// kInvalidArgument when pred is invalid where gt is evaluated.
FrameMetrics frame_metrics(const DepthFrame& pred, const DepthFrame& gt,
                           const ClampProfile& profile);

AggregateReport aggregate(std::span<const FrameMetrics> frames,
                          Pooling pooling = Pooling::kMeanOfFrames);

// 100 * (baseline - candidate) / baseline; positive means candidate is better.
// Throws kConfigMismatch when frame counts, profiles or densities differ.
MetricReduction compare(const AggregateReport& baseline, const AggregateReport& candidate);

// frame_id,mae_mm,rmse_mm,imae,irmse,iabsrel,valid_pixels with one row per
// frame and a final "mean" row. Fixed 6-decimal formatting.
void write_metrics_csv(std::ostream& out, std::span<const FrameMetrics> frames,
                       const AggregateReport& summary);

}  // namespace mvid
