#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mvid/error.hpp"

namespace mvid {

// Row-major 2D grid. Pixel (u, v) is column u, row v.
template <typename T>
class Grid {
 public:
  using value_type = T;

  Grid() = default;
  Grid(int width, int height, T fill = T{})
      : width_(checked_dim(width)), height_(checked_dim(height)),
        values_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}
  Grid(int width, int height, std::vector<T> values)
      : width_(checked_dim(width)), height_(checked_dim(height)), values_(std::move(values)) {
    if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
      fail(ErrorCode::kShapeMismatch, "grid value count does not match width*height");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  T& operator()(int u, int v) { return values_[index(u, v)]; }
  const T& operator()(int u, int v) const { return values_[index(u, v)]; }
  T& operator[](std::size_t i) { return values_[i]; }
  const T& operator[](std::size_t i) const { return values_[i]; }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }
  const std::vector<T>& storage() const noexcept { return values_; }

  bool contains(int u, int v) const noexcept {
    return u >= 0 && v >= 0 && u < width_ && v < height_;
  }

  template <typename U>
  bool same_shape(const Grid<U>& other) const noexcept {
    return width_ == other.width() && height_ == other.height();
  }

  bool operator==(const Grid&) const = default;

 private:
  static int checked_dim(int d) {
    if (d < 0) fail(ErrorCode::kInvalidArgument, "negative grid dimension");
    return d;
  }
  std::size_t index(int u, int v) const noexcept {
    return static_cast<std::size_t>(v) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(u);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<T> values_;
};

template <typename A, typename B>
void require_same_shape(const Grid<A>& a, const Grid<B>& b, std::string_view what) {
  if (!a.same_shape(b)) {
    fail(ErrorCode::kShapeMismatch,
         std::string(what) + ": " + std::to_string(a.width()) + "x" +
             std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
             std::to_string(b.height()));
  }
}

// Metric depth in meters. Non-positive or non-finite values mark invalid pixels.
struct DepthFrame : Grid<double> {
  using Grid<double>::Grid;
};

// Inverse depth in 1/m. Invalid pixels are stored as 0.
struct InverseDepthMap : Grid<double> {
  using Grid<double>::Grid;
};

struct ValidMask : Grid<std::uint8_t> {
  using Grid<std::uint8_t>::Grid;
  std::size_t count() const noexcept;
};

bool is_valid_depth(double d) noexcept;

struct SparsePoint {
  int u = 0;
  int v = 0;
  double depth = 0.0;  // meters

  bool operator==(const SparsePoint&) const = default;
};

using SparsePoints = std::vector<SparsePoint>;

// Throws kInvalidArgument when a point is outside width x height, has a
// non-positive depth, or repeats a pixel.
void validate_sparse(std::span<const SparsePoint> points, int width, int height);

struct ClampProfile {
  std::string name;
  double eval_min_depth = 0.0;
  double eval_max_depth = 0.0;
  double pred_min_depth = 0.0;
  double pred_max_depth = 0.0;

  static ClampProfile void_profile();
  static ClampProfile tartanair_profile();
  // "void" or "tartanair"; throws kInvalidArgument for anything else.
  static ClampProfile by_name(std::string_view name);

  void validate() const;
  double min_inverse() const noexcept { return 1.0 / pred_max_depth; }
  double max_inverse() const noexcept { return 1.0 / pred_min_depth; }

  bool operator==(const ClampProfile&) const = default;
};

std::pair<InverseDepthMap, ValidMask> to_inverse(const DepthFrame& frame);

// d = 1 / max(z, floor).
DepthFrame from_inverse(const InverseDepthMap& z, double floor);
DepthFrame from_inverse(const InverseDepthMap& z, const ClampProfile& profile);

double clamp_inverse(double z, const ClampProfile& profile) noexcept;
InverseDepthMap clamp_prediction(const InverseDepthMap& z, const ClampProfile& profile);

ValidMask eval_mask(const DepthFrame& gt, const ClampProfile& profile);

}  // namespace mvid
