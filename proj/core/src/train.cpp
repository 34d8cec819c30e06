#include "mvid/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace mvid {

void TrainConfig::validate() const {
  if (!(lr >= 0.0)) fail(ErrorCode::kInvalidArgument, "lr must be >= 0");
  if (epochs < 1) fail(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (batch < 1) fail(ErrorCode::kInvalidArgument, "batch must be >= 1");
  if (pyramid_levels < 1) fail(ErrorCode::kInvalidArgument, "pyramid_levels must be >= 1");
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "Adam betas must lie in [0, 1)");
  }
}

double TrainConfig::effective_lr(int epoch, bool regress_shift) const noexcept {
  double out = lr * (regress_shift ? shift_lr_factor : 1.0);
  if (lr_halve_every > 0) out *= std::pow(0.5, epoch / lr_halve_every);
  return out;
}

AdamW::AdamW(std::size_t n_params, const TrainConfig& config)
    : config_(config), m_(n_params, 0.0f), v_(n_params, 0.0f) {}

void AdamW::step(std::span<float> params, std::span<const float> grads, double lr) {
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const float decay = static_cast<float>(1.0 - lr * config_.weight_decay);
  const float step = static_cast<float>(lr / c1);
  const float inv_c2 = static_cast<float>(1.0 / c2);
  const float eps = static_cast<float>(config_.adam_eps);
  const float fb1 = static_cast<float>(b1), fb2 = static_cast<float>(b2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const float g = grads[i];
    params[i] *= decay;
    m_[i] = fb1 * m_[i] + (1.0f - fb1) * g;
    v_[i] = fb2 * v_[i] + (1.0f - fb2) * g * g;
    params[i] -= step * m_[i] / (std::sqrt(v_[i] * inv_c2) + eps);
  }
}

template <typename T>
LossTerms sample_loss(const TrainingSample& sample, const T* residual, const T* shift,
                      const LossConfig& config, T* d_residual, T* d_shift) {
  const std::size_t n = sample.z_tilde.size();
  std::vector<double> z_hat(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = shift != nullptr ? static_cast<double>(shift[i]) : 0.0;
    z_hat[i] = scaled_inverse(sample.z_tilde[i], static_cast<double>(residual[i]), t);
  }
  std::vector<double> dz(n);
  const LossTerms terms = loss_total_with_gradient(z_hat, sample.z_star, sample.mask, sample.width,
                                                   sample.height, config, dz);
  if (d_residual != nullptr) {
    for (std::size_t i = 0; i < n; ++i) {
      const bool active = 1.0 + static_cast<double>(residual[i]) > 0.0;
      d_residual[i] = static_cast<T>(active ? dz[i] * sample.z_tilde[i] : 0.0);
      if (d_shift != nullptr) d_shift[i] = static_cast<T>(dz[i]);
    }
  }
  return terms;
}

template LossTerms sample_loss<float>(const TrainingSample&, const float*, const float*,
                                      const LossConfig&, float*, float*);
template LossTerms sample_loss<double>(const TrainingSample&, const double*, const double*,
                                       const LossConfig&, double*, double*);

namespace {

void check_dataset(std::span<const TrainingSample> dataset, const SmlConfig& cfg) {
  if (dataset.empty()) fail(ErrorCode::kEmptyList, "training dataset is empty");
  const int w = dataset[0].width, h = dataset[0].height;
  for (const auto& s : dataset) {
    const std::size_t plane = static_cast<std::size_t>(s.width) * s.height;
    if (s.width != w || s.height != h || s.channels.size() != plane * cfg.in_channels() ||
        s.z_tilde.size() != plane || s.z_star.size() != plane || s.mask.size() != plane) {
      fail(ErrorCode::kShapeMismatch, "training samples must share one shape and channel count");
    }
  }
}

}  // namespace

TrainResult train_sml(std::span<const TrainingSample> dataset, const TrainConfig& config,
                      const SmlConfig& sml_config, const EpochCallback& on_epoch) {
  return train_sml(dataset, config, SmlWeights::initialize(sml_config, config.seed), on_epoch);
}

TrainResult train_sml(std::span<const TrainingSample> dataset, const TrainConfig& config,
                      SmlWeights initial, const EpochCallback& on_epoch) {
  config.validate();
  const SmlConfig sml_config = initial.config;
  check_dataset(dataset, sml_config);

  SmlNetwork<float> net(initial);
  AdamW optimizer(net.parameters().size(), config);
  const LossConfig loss_cfg{config.pyramid_levels, config.grad_loss_weight};
  const int w = dataset[0].width, h = dataset[0].height;
  const int channels = sml_config.in_channels();

  std::mt19937_64 shuffle_rng(config.seed ^ 0x5851f42d4c957f2dull);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainResult result;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    const double lr = config.effective_lr(epoch, sml_config.regress_shift);
    EpochStats stats{epoch, lr, 0.0, 0.0, 0.0};

    for (std::size_t start = 0, batch_idx = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch), ++batch_idx) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch));
      const int bn = static_cast<int>(end - start);

      Tensor<float> input(bn, channels, h, w);
      for (int b = 0; b < bn; ++b) {
        const auto& s = dataset[order[start + b]];
        std::copy(s.channels.begin(), s.channels.end(), input.sample(b));
      }

      net.zero_grad();
      auto out = net.forward(input);
      Tensor<float> d_res(bn, 1, h, w);
      Tensor<float> d_shift;
      if (sml_config.regress_shift) d_shift = Tensor<float>(bn, 1, h, w);

      LossTerms batch_terms;
      for (int b = 0; b < bn; ++b) {
        const auto& s = dataset[order[start + b]];
        const float* shift = sml_config.regress_shift ? out.shift.sample(b) : nullptr;
        float* ds = sml_config.regress_shift ? d_shift.sample(b) : nullptr;
        const LossTerms t =
            sample_loss<float>(s, out.residual.sample(b), shift, loss_cfg, d_res.sample(b), ds);
        batch_terms.total += t.total;
        batch_terms.depth += t.depth;
        batch_terms.grad += t.grad;
      }
      if (!std::isfinite(batch_terms.total)) {
        std::ostringstream msg;
        msg << "loss became " << batch_terms.total << " at epoch " << epoch << ", batch "
            << batch_idx;
        fail(ErrorCode::kNonFiniteLoss, msg.str());
      }

      const float inv_bn = 1.0f / static_cast<float>(bn);
      for (auto& g : d_res.data) g *= inv_bn;
      for (auto& g : d_shift.data) g *= inv_bn;
      net.backward(d_res, sml_config.regress_shift ? &d_shift : nullptr);
      optimizer.step(net.parameters(), net.gradients(), lr);

      stats.loss += batch_terms.total;
      stats.depth_loss += batch_terms.depth;
      stats.grad_loss += batch_terms.grad;
    }

    const double n = static_cast<double>(dataset.size());
    stats.loss /= n;
    stats.depth_loss /= n;
    stats.grad_loss /= n;
    result.trace.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  result.weights = net.to_weights();
  return result;
}

// ---------------------------------------------------------------------------

namespace {

struct Evaluation {
  double loss = 0.0;
  std::uint64_t signature = 0;
};

Evaluation evaluate(SmlNetwork<double>& net, const Tensor<double>& input,
                    const TrainingSample& sample, const LossConfig& cfg) {
  auto out = net.forward(input);
  const double* shift = net.config().regress_shift ? out.shift.sample(0) : nullptr;
  const LossTerms t =
      sample_loss<double>(sample, out.residual.sample(0), shift, cfg, nullptr, nullptr);

  const std::size_t n = sample.z_tilde.size();
  std::vector<double> z_hat(n);
  std::uint64_t h = net.activation_signature();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = out.residual.data[i];
    z_hat[i] = scaled_inverse(sample.z_tilde[i], r, shift ? shift[i] : 0.0);
    h = (h ^ (1.0 + r > 0.0 ? 0x51u : 0x17u)) * 1099511628211ull;
  }
  h ^= loss_branch_signature(z_hat, sample.z_star, sample.mask, sample.width, sample.height,
                             cfg.pyramid_levels);
  return {t.total, h};
}

}  // namespace

GradientCheckReport gradient_check(const SmlWeights& weights, const TrainingSample& sample,
                                   const GradientCheckOptions& options) {
  SmlNetwork<double> net(weights);
  const SmlConfig& cfg = net.config();
  const std::vector<double> channels(sample.channels.begin(), sample.channels.end());
  Tensor<double> input =
      stack_inputs<double>(std::span(&channels, 1), cfg.in_channels(), sample.height, sample.width);

  net.zero_grad();
  auto out = net.forward(input);
  Tensor<double> d_res(1, 1, sample.height, sample.width);
  Tensor<double> d_shift;
  if (cfg.regress_shift) d_shift = Tensor<double>(1, 1, sample.height, sample.width);
  sample_loss<double>(sample, out.residual.sample(0),
                      cfg.regress_shift ? out.shift.sample(0) : nullptr, options.loss,
                      d_res.sample(0), cfg.regress_shift ? d_shift.sample(0) : nullptr);
  net.backward(d_res, cfg.regress_shift ? &d_shift : nullptr);
  const std::vector<double> analytic(net.gradients().begin(), net.gradients().end());
  const std::uint64_t base_signature = evaluate(net, input, sample, options.loss).signature;

  std::vector<std::size_t> candidates;
  for (const auto& spec : net.layout()) {
    if (options.biases_only && spec.dims.size() != 1) continue;
    for (std::size_t i = 0; i < spec.count(); ++i) candidates.push_back(spec.offset + i);
  }
  std::mt19937_64 rng(options.seed);
  std::shuffle(candidates.begin(), candidates.end(), rng);

  GradientCheckReport report;
  auto params = net.parameters();
  for (std::size_t idx : candidates) {
    if (report.checked >= options.parameters) break;
    const double original = params[idx];
    params[idx] = original + options.epsilon;
    const Evaluation plus = evaluate(net, input, sample, options.loss);
    params[idx] = original - options.epsilon;
    const Evaluation minus = evaluate(net, input, sample, options.loss);
    params[idx] = original;
    if (plus.signature != base_signature || minus.signature != base_signature) {
      ++report.skipped_kinks;
      continue;
    }
    const double numeric = (plus.loss - minus.loss) / (2.0 * options.epsilon);
    const double a = analytic[idx] * options.corrupt_scale;
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-7});
    report.max_relative_error = std::max(report.max_relative_error, std::abs(a - numeric) / denom);
    ++report.checked;
  }
  return report;
}

}  // namespace mvid
