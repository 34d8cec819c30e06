#include "mvid/pipeline.hpp"

#include <algorithm>
#include <cstdio>

namespace mvid {

GlobalStage run_global_alignment(const InverseDepthMap& pred, std::span<const SparsePoint> sparse,
                                 const ClampProfile& profile) {
  GlobalStage out;
  out.alignment = fit_global(pred, sparse);
  out.z_tilde = apply_global(pred, out.alignment, profile);
  return out;
}

ScaffoldStage run_scaffolding(std::span<const SparsePoint> sparse, const InverseDepthMap& z_tilde) {
  ScaffoldStage out;
  out.anchors = compute_anchors(sparse, z_tilde);
  out.scaffold = build_scaffold(out.anchors.anchors, z_tilde.width(), z_tilde.height());
  return out;
}

SmlFrameChannels frame_channels(const SmlConfig& config, const InverseDepthMap& z_tilde,
                                const ScaleScaffold& scaffold, std::span<const SparsePoint> sparse,
                                const RgbImage* rgb) {
  SmlFrameChannels ch;
  ch.z_tilde = z_tilde;
  ch.scaffold = scaffold;
  const auto& extra = config.extra;
  if (extra.confidence) ch.confidence = confidence_map(sparse, z_tilde.width(), z_tilde.height());
  if (rgb != nullptr && (extra.gradients || extra.grayscale || extra.rgb)) {
    require_same_shape(z_tilde, *rgb, "rgb frame");
    ch.gray = grayscale(*rgb);
    if (extra.gradients) ch.gradients = scharr_gradients(ch.gray);
    if (extra.rgb) ch.rgb = *rgb;
  }
  return ch;
}

SmlOutput infer_sml(SmlNetwork<float>& net, std::span<const float> chw, int width, int height) {
  const int c = net.config().in_channels();
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  if (chw.size() != plane * c) fail(ErrorCode::kShapeMismatch, "input channel stack size");

  auto round_up = [](int n) {
    return (n + kSmlSpatialMultiple - 1) / kSmlSpatialMultiple * kSmlSpatialMultiple;
  };
  const int pw = round_up(width), ph = round_up(height);
  Tensor<float> input(1, c, ph, pw);
  for (int k = 0; k < c; ++k) {
    const float* src = chw.data() + static_cast<std::size_t>(k) * plane;
    float* dst = input.plane(0, k);
    for (int y = 0; y < ph; ++y) {
      const int sy = std::min(y, height - 1);
      for (int x = 0; x < pw; ++x) {
        dst[static_cast<std::size_t>(y) * pw + x] =
            src[static_cast<std::size_t>(sy) * width + std::min(x, width - 1)];
      }
    }
  }

  const auto out = net.forward(input);
  auto crop = [&](const Tensor<float>& t) {
    Grid<double> g(width, height);
    const float* p = t.plane(0, 0);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) g(x, y) = p[static_cast<std::size_t>(y) * pw + x];
    }
    return g;
  };
  SmlOutput result{crop(out.residual), std::nullopt};
  if (net.config().regress_shift) result.shift = crop(out.shift);
  return result;
}

FrameResult align_frame(const InverseDepthMap& pred, std::span<const SparsePoint> sparse,
                        const ClampProfile& profile, SmlNetwork<float>* net, const RgbImage* rgb) {
  GlobalStage ga = run_global_alignment(pred, sparse, profile);
  ScaffoldStage sc = run_scaffolding(sparse, ga.z_tilde);

  FrameResult r;
  r.alignment = ga.alignment;
  if (net != nullptr) {
    const SmlFrameChannels ch = frame_channels(net->config(), ga.z_tilde, sc.scaffold, sparse, rgb);
    const std::vector<float> chw = assemble_channels<float>(net->config(), ch);
    const SmlOutput out = infer_sml(*net, chw, pred.width(), pred.height());
    r.z_sml = apply_residual(ga.z_tilde, out.residual, out.shift ? &*out.shift : nullptr, profile);
  }
  r.anchors = std::move(sc.anchors);
  r.scaffold = std::move(sc.scaffold);
  r.z_ga = std::move(ga.z_tilde);
  return r;
}

TrainingSample make_training_sample(const SmlConfig& config, const InverseDepthMap& pred,
                                    std::span<const SparsePoint> sparse, const DepthFrame& gt,
                                    const ClampProfile& profile, const RgbImage* rgb) {
  require_same_shape(pred, gt, "training frame");
  const GlobalStage ga = run_global_alignment(pred, sparse, profile);
  const ScaffoldStage sc = run_scaffolding(sparse, ga.z_tilde);
  const SmlFrameChannels ch = frame_channels(config, ga.z_tilde, sc.scaffold, sparse, rgb);

  TrainingSample s;
  s.width = pred.width();
  s.height = pred.height();
  s.channels = assemble_channels<float>(config, ch);
  s.z_tilde = ga.z_tilde.storage();
  const ValidMask mask = eval_mask(gt, profile);
  s.mask = mask.storage();
  s.z_star.assign(gt.size(), 0.0);
  for (std::size_t i = 0; i < gt.size(); ++i) {
    if (mask[i]) s.z_star[i] = 1.0 / gt[i];
  }
  return s;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  // splitmix64 finaliser over the combined key.
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

SyntheticFrame make_synthetic_frame(const SyntheticDatasetConfig& config, int index) {
  if (index < 0) fail(ErrorCode::kInvalidArgument, "frame index must be >= 0");
  const auto i = static_cast<std::uint64_t>(index);

  SceneConfig scene_cfg = config.scene;
  scene_cfg.seed = derive_seed(config.seed, 3 * i);
  SyntheticScene scene = synth_scene(scene_cfg);

  const InverseDepthMap gt_inv = to_inverse(scene.gt).first;
  SyntheticPrediction pred = synth_prediction(gt_inv, derive_seed(config.seed, 3 * i + 1),
                                              config.distortion);

  SparsifierConfig sp = config.sparsifier;
  sp.seed = derive_seed(config.seed, 3 * i + 2);

  SyntheticFrame f;
  char id[32];
  std::snprintf(id, sizeof id, "f%05d", index);
  f.id = id;
  f.sparse = sparsify(scene.gt, sp, &scene.rgb);
  f.rgb = std::move(scene.rgb);
  f.gt = std::move(scene.gt);
  f.pred = std::move(pred.z);
  return f;
}

}  // namespace mvid
