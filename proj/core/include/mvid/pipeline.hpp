#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mvid/depth.hpp"
#include "mvid/global_align.hpp"
#include "mvid/image_ops.hpp"
#include "mvid/scaffold.hpp"
#include "mvid/sml.hpp"
#include "mvid/sparsify.hpp"
#include "mvid/synth.hpp"
#include "mvid/train.hpp"

namespace mvid {

struct GlobalStage {
  AffineAlignment alignment;
  InverseDepthMap z_tilde;  // aligned and clamped to the profile
};

GlobalStage run_global_alignment(const InverseDepthMap& pred, std::span<const SparsePoint> sparse,
                                 const ClampProfile& profile);

struct ScaffoldStage {
  AnchorSet anchors;
  ScaleScaffold scaffold;
};

ScaffoldStage run_scaffolding(std::span<const SparsePoint> sparse, const InverseDepthMap& z_tilde);

// Fills only the channels the config asks for. Image-derived channels need rgb.
SmlFrameChannels frame_channels(const SmlConfig& config, const InverseDepthMap& z_tilde,
                                const ScaleScaffold& scaffold, std::span<const SparsePoint> sparse,
                                const RgbImage* rgb);

struct SmlOutput {
  Grid<double> residual;
  std::optional<Grid<double>> shift;
};

// Runs one frame (C x H x W) through the network. Frames whose sides are not
// multiples of 16 are edge-padded and the output cropped back.
SmlOutput infer_sml(SmlNetwork<float>& net, std::span<const float> chw, int width, int height);

struct FrameResult {
  AffineAlignment alignment;
  AnchorSet anchors;
  ScaleScaffold scaffold;
  InverseDepthMap z_ga;                  // global alignment only
  std::optional<InverseDepthMap> z_sml;  // set when a network was given
};

FrameResult align_frame(const InverseDepthMap& pred, std::span<const SparsePoint> sparse,
                        const ClampProfile& profile, SmlNetwork<float>* net = nullptr,
                        const RgbImage* rgb = nullptr);

// GA + scaffold + channel assembly, supervised by gt inside the profile's
// evaluation range.
TrainingSample make_training_sample(const SmlConfig& config, const InverseDepthMap& pred,
                                    std::span<const SparsePoint> sparse, const DepthFrame& gt,
                                    const ClampProfile& profile, const RgbImage* rgb = nullptr);

struct SyntheticDatasetConfig {
  SceneConfig scene;
  SparsifierConfig sparsifier;
  PredictionDistortion distortion;
  std::uint64_t seed = 0;
};

struct SyntheticFrame {
  std::string id;
  RgbImage rgb;
  DepthFrame gt;
  InverseDepthMap pred;
  SparsePoints sparse;
};

// Frame `index` of a reproducible synthetic dataset; each index draws its
// scene, prediction and sparse points from independent derived seeds.
SyntheticFrame make_synthetic_frame(const SyntheticDatasetConfig& config, int index);

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept;

}  // namespace mvid
