#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mvid/depth.hpp"
#include "mvid/image_ops.hpp"
#include "mvid/scaffold.hpp"
#include "mvid/tensor.hpp"

namespace mvid {

// Optional channels appended after the two mandatory ones (aligned inverse
// depth, scaffold - 1), in this order.
struct InputChannels {
  bool confidence = false;
  bool gradients = false;
  bool grayscale = false;
  bool rgb = false;  // three channels

  int count() const noexcept {
    return int(confidence) + int(gradients) + int(grayscale) + 3 * int(rgb);
  }
  std::uint32_t bits() const noexcept;
  static InputChannels from_bits(std::uint32_t bits) noexcept;
  bool operator==(const InputChannels&) const = default;
};

struct SmlConfig {
  InputChannels extra;
  std::array<int, 4> stage_widths{16, 32, 64, 128};
  bool regress_shift = false;
  int input_resolution = 96;  // training crop edge; inference accepts any multiple of 16

  int in_channels() const noexcept { return 2 + extra.count(); }
  void validate() const;
  bool operator==(const SmlConfig&) const = default;
};

inline constexpr int kSmlSpatialMultiple = 16;

struct TensorSpec {
  std::string name;
  std::vector<int> dims;
  std::size_t offset = 0;  // into the flat parameter vector

  std::size_t count() const noexcept;
};

// Parameter tensors in a fixed order determined only by the config.
std::vector<TensorSpec> parameter_layout(const SmlConfig& config);

struct SmlWeights {
  SmlConfig config;
  std::vector<TensorSpec> layout;
  std::vector<float> values;  // concatenation of every tensor in layout order

  // He-normal convolutions, zero biases, and zero output 1x1 head(s), so the
  // fresh network regresses r = 0 (and t = 0). With zero_output_head off the
  // head is He-initialised like every other convolution.
  static SmlWeights initialize(const SmlConfig& config, std::uint64_t seed,
                               bool zero_output_head = true);

  const TensorSpec& spec(std::string_view name) const;
  std::span<const float> tensor(std::string_view name) const;
  std::span<float> tensor(std::string_view name);
};

// Encoder: four stages of (3x3 conv, ReLU, 3x3 stride-2 conv, ReLU) giving
// skips at 1/2 .. 1/16. Decoder: four FeatureFusion blocks (ResidualConvUnit
// on the skip, add, ResidualConvUnit, 2x bilinear upsample, 1x1 projection);
// the shallowest block projects without upsampling. Head: 3x3 conv, 2x
// upsample, 3x3 conv, ReLU, 1x1 conv. Optional second head for shift.
template <typename T>
class SmlNetwork {
 public:
  explicit SmlNetwork(const SmlWeights& weights);
  ~SmlNetwork();
  SmlNetwork(SmlNetwork&&) noexcept;
  SmlNetwork& operator=(SmlNetwork&&) noexcept;

  const SmlConfig& config() const noexcept;
  const std::vector<TensorSpec>& layout() const noexcept;

  std::span<T> parameters() noexcept;
  std::span<const T> parameters() const noexcept;
  std::span<T> gradients() noexcept;
  void zero_grad() noexcept;

  SmlWeights to_weights() const;

  struct Output {
    Tensor<T> residual;  // N x 1 x H x W
    Tensor<T> shift;     // empty unless regress_shift
  };

  // Caches activations for a following backward().
  Output forward(const Tensor<T>& input);

  // Accumulates parameter gradients. d_shift may be null.
  void backward(const Tensor<T>& d_residual, const Tensor<T>* d_shift);

  // Hash of the on/off pattern of every ReLU in the last forward pass.
  std::uint64_t activation_signature() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

extern template class SmlNetwork<float>;
extern template class SmlNetwork<double>;

struct SmlFrameChannels {
  InverseDepthMap z_tilde;
  ScaleScaffold scaffold;
  ConfidenceMap confidence;  // only read when the config asks for it
  GrayImage gradients;
  GrayImage gray;
  RgbImage rgb;
};

// C x H x W values in channel order; throws kShapeMismatch on missing or
// mis-sized channels.
template <typename T>
std::vector<T> assemble_channels(const SmlConfig& config, const SmlFrameChannels& channels);

// Packs per-frame channel stacks into one N x C x H x W tensor.
template <typename T>
Tensor<T> stack_inputs(std::span<const std::vector<T>> frames, int channels, int height, int width);

// z_hat = max(0, 1 + r) * z_tilde (+ t), then clamped to the profile.
InverseDepthMap apply_residual(const InverseDepthMap& z_tilde, const Grid<double>& residual,
                               const Grid<double>* shift, const ClampProfile& profile);

// Unclamped form used by the training loss.
template <typename T>
T scaled_inverse(T z_tilde, T residual, T shift) noexcept {
  const T scale = T{1} + residual;
  return (scale > T{0} ? scale : T{0}) * z_tilde + shift;
}

}  // namespace mvid
