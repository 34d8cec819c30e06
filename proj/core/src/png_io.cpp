#include "mvid/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>
#include <string>
#include <vector>

namespace mvid {

DepthEncoding parse_depth_encoding(std::string_view name) {
  if (name == "mm") return DepthEncoding::kMillimeters;
  if (name == "q8.8") return DepthEncoding::kQ8_8;
  fail(ErrorCode::kInvalidArgument, "unknown depth encoding '" + std::string(name) + "'");
}

std::string_view depth_encoding_name(DepthEncoding encoding) noexcept {
  return encoding == DepthEncoding::kMillimeters ? "mm" : "q8.8";
}

double depth_quantum(DepthEncoding encoding) noexcept {
  return encoding == DepthEncoding::kMillimeters ? 1.0 / 1000.0 : 1.0 / 256.0;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const noexcept {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.string().c_str(), mode));
  if (!f) fail(ErrorCode::kIoFailure, "cannot open '" + path.string() + "'");
  return f;
}

[[noreturn]] void png_error_fn(png_structp png, png_const_charp) {
  png_longjmp(png, 1);
}
void png_warning_fn(png_structp, png_const_charp) {}

struct DecodedPng {
  int width = 0;
  int height = 0;
  int bit_depth = 0;
  int channels = 0;  // after palette expansion
  std::vector<std::uint16_t> samples;  // row-major, interleaved
};

DecodedPng decode_png(const std::filesystem::path& path, bool depth_only) {
  FilePtr file = open_file(path, "rb");
  unsigned char sig[8] = {};
  if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    fail(ErrorCode::kBadFormat, "'" + path.string() + "' is not a PNG file");
  }

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  if (png == nullptr) fail(ErrorCode::kIoFailure, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(ErrorCode::kIoFailure, "libpng initialisation failed");
  }

  DecodedPng out;
  // Error states are recorded here and raised after the jump target so no C++
  // exception crosses libpng frames.
  volatile ErrorCode err = ErrorCode::kBadFormat;
  std::string message;
  std::vector<png_bytep> rows;
  std::vector<std::uint8_t> raw;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(ErrorCode::kBadFormat, "corrupt PNG data in '" + path.string() + "'");
  }

  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);

  if (depth_only) {
    if (color != PNG_COLOR_TYPE_GRAY) {
      message = "'" + path.string() + "' is not a single-channel PNG";
    } else if (bit_depth != 16) {
      err = ErrorCode::kUnsupportedBitDepth;
      message = "'" + path.string() + "' has " + std::to_string(bit_depth) +
                "-bit samples, expected 16";
    }
  }
  if (message.empty()) {
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (bit_depth == 16) png_set_swap(png);  // little-endian sample bytes
    png_read_update_info(png, info);

    out.width = static_cast<int>(w);
    out.height = static_cast<int>(h);
    out.bit_depth = png_get_bit_depth(png, info);
    out.channels = png_get_channels(png, info);
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    raw.resize(rowbytes * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = raw.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!message.empty()) fail(err, message);

  const std::size_t n = static_cast<std::size_t>(out.width) * out.height * out.channels;
  out.samples.resize(n);
  if (out.bit_depth == 16) {
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] = static_cast<std::uint16_t>(raw[2 * i] | (raw[2 * i + 1] << 8));
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) out.samples[i] = raw[i];
  }
  return out;
}

void encode_png(const std::filesystem::path& path, int width, int height, int bit_depth,
                int color_type, const std::vector<std::uint8_t>& bytes) {
  FilePtr file = open_file(path, "wb");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_error_fn, png_warning_fn);
  if (png == nullptr) fail(ErrorCode::kIoFailure, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (info == nullptr) {
    png_destroy_write_struct(&png, nullptr);
    fail(ErrorCode::kIoFailure, "libpng initialisation failed");
  }
  const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
  const std::size_t rowbytes = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
  std::vector<png_bytep> rows(static_cast<std::size_t>(height));
  for (int y = 0; y < height; ++y) {
    rows[static_cast<std::size_t>(y)] =
        const_cast<png_bytep>(bytes.data()) + static_cast<std::size_t>(y) * rowbytes;
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(ErrorCode::kIoFailure, "failed writing '" + path.string() + "'");
  }
  png_init_io(png, file.get());
  png_set_compression_level(png, 6);
  png_set_filter(png, 0, PNG_FILTER_NONE | PNG_FILTER_SUB | PNG_FILTER_UP);
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height),
               bit_depth, color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);

  if (std::fflush(file.get()) != 0 || std::ferror(file.get())) {
    fail(ErrorCode::kIoFailure, "failed writing '" + path.string() + "'");
  }
}

void require_nonempty(int width, int height, const std::filesystem::path& path) {
  if (width <= 0 || height <= 0) {
    fail(ErrorCode::kInvalidArgument, "cannot write empty image '" + path.string() + "'");
  }
}

}  // namespace

DepthFrame read_depth_png(const std::filesystem::path& path, DepthEncoding encoding) {
  const DecodedPng png = decode_png(path, true);
  const double q = depth_quantum(encoding);
  DepthFrame frame(png.width, png.height, 0.0);
  for (std::size_t i = 0; i < frame.size(); ++i) frame[i] = png.samples[i] * q;
  return frame;
}

void write_depth_png(const DepthFrame& frame, const std::filesystem::path& path,
                     DepthEncoding encoding) {
  require_nonempty(frame.width(), frame.height(), path);
  const double per_meter = 1.0 / depth_quantum(encoding);
  std::vector<std::uint8_t> bytes(frame.size() * 2);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    std::uint16_t value = 0;
    if (is_valid_depth(frame[i])) {
      // nearbyint honours the default round-to-nearest-even mode.
      const double counts = std::nearbyint(std::min(frame[i] * per_meter, 65535.0));
      value = static_cast<std::uint16_t>(std::max(1.0, counts));
    }
    bytes[2 * i] = static_cast<std::uint8_t>(value >> 8);  // PNG is big-endian
    bytes[2 * i + 1] = static_cast<std::uint8_t>(value & 0xff);
  }
  encode_png(path, frame.width(), frame.height(), 16, PNG_COLOR_TYPE_GRAY, bytes);
}

void write_rgb8_png(const Rgb8Image& image, const std::filesystem::path& path) {
  require_nonempty(image.width(), image.height(), path);
  std::vector<std::uint8_t> bytes;
  bytes.reserve(image.size() * 3);
  for (const Rgb8& p : image.values()) bytes.insert(bytes.end(), p.begin(), p.end());
  encode_png(path, image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, bytes);
}

Rgb8Image to_rgb8(const RgbImage& image) {
  auto q = [](double c) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0));
  };
  Rgb8Image out(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    out[i] = {q(image[i].r), q(image[i].g), q(image[i].b)};
  }
  return out;
}

RgbImage from_rgb8(const Rgb8Image& image) {
  RgbImage out(image.width(), image.height());
  for (std::size_t i = 0; i < image.size(); ++i) {
    out[i] = {image[i][0] / 255.0, image[i][1] / 255.0, image[i][2] / 255.0};
  }
  return out;
}

RgbImage read_rgb_png(const std::filesystem::path& path) {
  const DecodedPng png = decode_png(path, false);
  const double scale = png.bit_depth == 16 ? 65535.0 : 255.0;
  RgbImage out(png.width, png.height);
  const int c = png.channels;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::uint16_t* s = png.samples.data() + i * c;
    if (c <= 2) {
      const double g = s[0] / scale;
      out[i] = {g, g, g};
    } else {
      out[i] = {s[0] / scale, s[1] / scale, s[2] / scale};
    }
  }
  return out;
}

void write_rgb_png(const RgbImage& image, const std::filesystem::path& path) {
  write_rgb8_png(to_rgb8(image), path);
}

}  // namespace mvid
