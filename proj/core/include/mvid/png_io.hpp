#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>

#include "mvid/depth.hpp"
#include "mvid/image_ops.hpp"

namespace mvid {

// 16-bit depth PNG conventions. 0 always marks an invalid pixel.
enum class DepthEncoding {
  kMillimeters,  // meters = value / 1000
  kQ8_8,         // meters = value / 256
};

DepthEncoding parse_depth_encoding(std::string_view name);  // "mm" or "q8.8"
std::string_view depth_encoding_name(DepthEncoding encoding) noexcept;
double depth_quantum(DepthEncoding encoding) noexcept;  // meters per count

// Requires a 16-bit single-channel PNG. Throws kBadFormat for anything that is
// not a grayscale PNG and kUnsupportedBitDepth for other bit depths.
DepthFrame read_depth_png(const std::filesystem::path& path, DepthEncoding encoding);

// Rounds half to even; valid depths saturate to [1, 65535] counts.
void write_depth_png(const DepthFrame& frame, const std::filesystem::path& path,
                     DepthEncoding encoding);

using Rgb8 = std::array<std::uint8_t, 3>;
using Rgb8Image = Grid<Rgb8>;

// 8-bit RGB output with fixed compression settings and no timestamp.
void write_rgb8_png(const Rgb8Image& image, const std::filesystem::path& path);

Rgb8Image to_rgb8(const RgbImage& image);
RgbImage from_rgb8(const Rgb8Image& image);

// Accepts 8/16-bit gray, gray+alpha, RGB or RGBA; alpha is dropped.
RgbImage read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace mvid
