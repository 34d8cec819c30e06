#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mvid/losses.hpp"
#include "mvid/sml.hpp"

namespace mvid {

struct TrainConfig {
  double lr = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double weight_decay = 1e-3;
  int lr_halve_every = 5;  // epochs; <= 0 disables the schedule
  int epochs = 20;
  int batch = 8;
  double grad_loss_weight = kDefaultGradLossWeight;
  int pyramid_levels = kDefaultPyramidLevels;
  double shift_lr_factor = 0.8;  // applied when the config regresses shift
  std::uint64_t seed = 0;

  void validate() const;
  double effective_lr(int epoch, bool regress_shift) const noexcept;
};

// One training frame: the stacked SML input channels plus what the loss
// needs. z_tilde duplicates channel 0 in double precision.
struct TrainingSample {
  int width = 0;
  int height = 0;
  std::vector<float> channels;  // C x H x W
  std::vector<double> z_tilde;
  std::vector<double> z_star;
  std::vector<std::uint8_t> mask;
};

struct EpochStats {
  int epoch = 0;
  double lr = 0.0;
  double loss = 0.0;
  double depth_loss = 0.0;
  double grad_loss = 0.0;
};

struct TrainResult {
  SmlWeights weights;
  std::vector<EpochStats> trace;
};

using EpochCallback = std::function<void(const EpochStats&)>;

// Decoupled-weight-decay Adam.
class AdamW {
 public:
  AdamW(std::size_t n_params, const TrainConfig& config);
  void step(std::span<float> params, std::span<const float> grads, double lr);
  std::uint64_t steps() const noexcept { return t_; }

 private:
  TrainConfig config_;
  std::vector<float> m_;
  std::vector<float> v_;
  std::uint64_t t_ = 0;
};

// Loss and d(loss)/d(residual), d(loss)/d(shift) for one network output.
template <typename T>
LossTerms sample_loss(const TrainingSample& sample, const T* residual, const T* shift,
                      const LossConfig& config, T* d_residual, T* d_shift);

// Deterministic for a given seed. Throws kNonFiniteLoss with the epoch and
// batch that produced it.
TrainResult train_sml(std::span<const TrainingSample> dataset, const TrainConfig& config,
                      const SmlConfig& sml_config, const EpochCallback& on_epoch = {});
TrainResult train_sml(std::span<const TrainingSample> dataset, const TrainConfig& config,
                      SmlWeights initial, const EpochCallback& on_epoch = {});

struct GradientCheckOptions {
  double epsilon = 1e-3;
  int parameters = 64;
  std::uint64_t seed = 0;
  // Multiplies the analytic gradient; anything but 1 must make the check fail.
  double corrupt_scale = 1.0;
  // Only check biases (useful with a zero output head, where most weight
  // gradients vanish).
  bool biases_only = false;
  LossConfig loss;
};

struct GradientCheckReport {
  double max_relative_error = 0.0;
  int checked = 0;
  int skipped_kinks = 0;  // parameters whose +-epsilon probe crossed a ReLU or |.| kink
};

// Compares analytic parameter gradients of the training loss against central
// differences, in double precision. Parameters whose probe changes any
// piecewise-linear branch are resampled.
GradientCheckReport gradient_check(const SmlWeights& weights, const TrainingSample& sample,
                                   const GradientCheckOptions& options);

}  // namespace mvid
