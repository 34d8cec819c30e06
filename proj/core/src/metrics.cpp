#include "mvid/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace mvid {

FrameMetrics frame_metrics(const DepthFrame& pred, const DepthFrame& gt,
                           const ClampProfile& profile) {
  require_same_shape(pred, gt, "frame_metrics");
  const ValidMask mask = eval_mask(gt, profile);

  FrameMetrics m;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (!mask[i]) continue;
    if (!is_valid_depth(pred[i])) {
      fail(ErrorCode::kInvalidArgument, "prediction is invalid at an evaluated pixel");
    }
    const double d_err_mm = std::abs(gt[i] - pred[i]) * 1000.0;
    const double z_star = 1000.0 / gt[i];
    const double z_hat = 1000.0 / pred[i];
    const double z_err = std::abs(z_star - z_hat);
    m.sum_abs_mm += d_err_mm;
    m.sum_sq_mm += d_err_mm * d_err_mm;
    m.sum_abs_inv += z_err;
    m.sum_sq_inv += z_err * z_err;
    m.sum_rel_inv += z_err / z_star;
    ++m.valid_pixels;
  }
  if (m.valid_pixels == 0) fail(ErrorCode::kEmptyMask, "no ground truth inside the eval range");

  const double n = static_cast<double>(m.valid_pixels);
  m.mae_mm = m.sum_abs_mm / n;
  m.rmse_mm = std::sqrt(m.sum_sq_mm / n);
  m.imae = m.sum_abs_inv / n;
  m.irmse = std::sqrt(m.sum_sq_inv / n);
  m.iabsrel = m.sum_rel_inv / n;
  return m;
}

AggregateReport aggregate(std::span<const FrameMetrics> frames, Pooling pooling) {
  if (frames.empty()) fail(ErrorCode::kEmptyList, "no frames to aggregate");
  AggregateReport r;
  r.frames = frames.size();
  r.pooling = pooling;

  if (pooling == Pooling::kMeanOfFrames) {
    for (const auto& f : frames) {
      r.mae_mm += f.mae_mm;
      r.rmse_mm += f.rmse_mm;
      r.imae += f.imae;
      r.irmse += f.irmse;
      r.iabsrel += f.iabsrel;
    }
    const double n = static_cast<double>(frames.size());
    r.mae_mm /= n;
    r.rmse_mm /= n;
    r.imae /= n;
    r.irmse /= n;
    r.iabsrel /= n;
    return r;
  }

  double abs_mm = 0, sq_mm = 0, abs_inv = 0, sq_inv = 0, rel = 0, pixels = 0;
  for (const auto& f : frames) {
    abs_mm += f.sum_abs_mm;
    sq_mm += f.sum_sq_mm;
    abs_inv += f.sum_abs_inv;
    sq_inv += f.sum_sq_inv;
    rel += f.sum_rel_inv;
    pixels += static_cast<double>(f.valid_pixels);
  }
  r.mae_mm = abs_mm / pixels;
  r.rmse_mm = std::sqrt(sq_mm / pixels);
  r.imae = abs_inv / pixels;
  r.irmse = std::sqrt(sq_inv / pixels);
  r.iabsrel = rel / pixels;
  return r;
}

MetricReduction compare(const AggregateReport& baseline, const AggregateReport& candidate) {
  if (baseline.frames != candidate.frames || baseline.profile != candidate.profile ||
      baseline.density != candidate.density || baseline.pooling != candidate.pooling) {
    fail(ErrorCode::kConfigMismatch, "reports cover different frame sets or configurations");
  }
  auto pct = [](double b, double c) { return b == 0.0 ? 0.0 : 100.0 * (b - c) / b; };
  return {pct(baseline.mae_mm, candidate.mae_mm), pct(baseline.rmse_mm, candidate.rmse_mm),
          pct(baseline.imae, candidate.imae), pct(baseline.irmse, candidate.irmse),
          pct(baseline.iabsrel, candidate.iabsrel)};
}

void write_metrics_csv(std::ostream& out, std::span<const FrameMetrics> frames,
                       const AggregateReport& summary) {
  char buf[512];
  out << "frame_id,mae_mm,rmse_mm,imae,irmse,iabsrel,valid_pixels\n";
  std::size_t total_pixels = 0;
  for (const auto& f : frames) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%zu\n", f.frame_id.c_str(),
                  f.mae_mm, f.rmse_mm, f.imae, f.irmse, f.iabsrel, f.valid_pixels);
    out << buf;
    total_pixels += f.valid_pixels;
  }
  std::snprintf(buf, sizeof buf, "mean,%.6f,%.6f,%.6f,%.6f,%.6f,%zu\n", summary.mae_mm,
                summary.rmse_mm, summary.imae, summary.irmse, summary.iabsrel, total_pixels);
  out << buf;
}

}  // namespace mvid
