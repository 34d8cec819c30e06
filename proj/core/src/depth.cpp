#include "mvid/depth.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace mvid {

std::string_view error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptySparse: return "EmptySparse";
    case ErrorCode::kAllZeroPrediction: return "AllZeroPrediction";
    case ErrorCode::kDuplicateAnchorPixel: return "DuplicateAnchorPixel";
    case ErrorCode::kEmptyMask: return "EmptyMask";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kConfigMismatch: return "ConfigMismatch";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kBadFormat: return "BadFormat";
    case ErrorCode::kUnsupportedBitDepth: return "UnsupportedBitDepth";
    case ErrorCode::kIoFailure: return "IoFailure";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kNonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::kBadMagic: return "BadMagic";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptDirectory: return "CorruptDirectory";
  }
  return "Unknown";
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return 2;
    case ErrorCode::kShapeMismatch: return 3;
    case ErrorCode::kEmptySparse: return 4;
    case ErrorCode::kAllZeroPrediction: return 5;
    case ErrorCode::kDuplicateAnchorPixel: return 6;
    case ErrorCode::kEmptyMask: return 7;
    case ErrorCode::kEmptyList: return 8;
    case ErrorCode::kConfigMismatch: return 9;
    case ErrorCode::kNonFiniteLoss: return 10;
    case ErrorCode::kBadFormat: return 11;
    case ErrorCode::kUnsupportedBitDepth: return 12;
    case ErrorCode::kIoFailure: return 13;
    case ErrorCode::kParseError: return 14;
    case ErrorCode::kNonPositiveDepth: return 15;
    case ErrorCode::kBadMagic: return 16;
    case ErrorCode::kVersionMismatch: return 17;
    case ErrorCode::kCorruptDirectory: return 18;
  }
  return 1;
}

std::size_t ValidMask::count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values().begin(), values().end(), [](std::uint8_t b) { return b != 0; }));
}

bool is_valid_depth(double d) noexcept { return std::isfinite(d) && d > 0.0; }

void validate_sparse(std::span<const SparsePoint> points, int width, int height) {
  std::set<std::pair<int, int>> seen;
  for (const auto& p : points) {
    if (p.u < 0 || p.v < 0 || p.u >= width || p.v >= height) {
      fail(ErrorCode::kInvalidArgument, "sparse point (" + std::to_string(p.u) + "," +
                                            std::to_string(p.v) + ") outside frame");
    }
    if (!is_valid_depth(p.depth)) {
      fail(ErrorCode::kInvalidArgument, "sparse point with non-positive depth");
    }
    if (!seen.emplace(p.u, p.v).second) {
      fail(ErrorCode::kInvalidArgument, "duplicate sparse pixel (" + std::to_string(p.u) +
                                            "," + std::to_string(p.v) + ")");
    }
  }
}

ClampProfile ClampProfile::void_profile() { return {"void", 0.2, 5.0, 0.1, 8.0}; }

ClampProfile ClampProfile::tartanair_profile() { return {"tartanair", 0.2, 50.0, 0.1, 80.0}; }

ClampProfile ClampProfile::by_name(std::string_view name) {
  if (name == "void") return void_profile();
  if (name == "tartanair") return tartanair_profile();
  fail(ErrorCode::kInvalidArgument, "unknown clamp profile '" + std::string(name) + "'");
}

void ClampProfile::validate() const {
  if (!(pred_min_depth > 0.0 && pred_min_depth < pred_max_depth)) {
    fail(ErrorCode::kInvalidArgument, "profile requires 0 < pred_min < pred_max");
  }
  if (!(eval_min_depth > 0.0 && eval_min_depth < eval_max_depth)) {
    fail(ErrorCode::kInvalidArgument, "profile requires 0 < eval_min < eval_max");
  }
}

std::pair<InverseDepthMap, ValidMask> to_inverse(const DepthFrame& frame) {
  InverseDepthMap z(frame.width(), frame.height(), 0.0);
  ValidMask mask(frame.width(), frame.height(), 0);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (is_valid_depth(frame[i])) {
      z[i] = 1.0 / frame[i];
      mask[i] = 1;
    }
  }
  return {std::move(z), std::move(mask)};
}

DepthFrame from_inverse(const InverseDepthMap& z, double floor) {
  if (!(floor > 0.0)) fail(ErrorCode::kInvalidArgument, "from_inverse floor must be > 0");
  DepthFrame d(z.width(), z.height(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double zi = std::isfinite(z[i]) ? z[i] : 0.0;
    d[i] = 1.0 / std::max(zi, floor);
  }
  return d;
}

DepthFrame from_inverse(const InverseDepthMap& z, const ClampProfile& profile) {
  return from_inverse(z, profile.min_inverse());
}

double clamp_inverse(double z, const ClampProfile& profile) noexcept {
  if (std::isnan(z)) return profile.min_inverse();
  return std::clamp(z, profile.min_inverse(), profile.max_inverse());
}

InverseDepthMap clamp_prediction(const InverseDepthMap& z, const ClampProfile& profile) {
  InverseDepthMap out = z;
  for (auto& v : out.values()) v = clamp_inverse(v, profile);
  return out;
}

ValidMask eval_mask(const DepthFrame& gt, const ClampProfile& profile) {
  ValidMask mask(gt.width(), gt.height(), 0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const double d = gt[i];
    mask[i] = is_valid_depth(d) && d >= profile.eval_min_depth && d <= profile.eval_max_depth;
  }
  return mask;
}

}  // namespace mvid
