#include "mvid/sml.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace mvid {

std::uint32_t InputChannels::bits() const noexcept {
  return std::uint32_t(confidence) | std::uint32_t(gradients) << 1 |
         std::uint32_t(grayscale) << 2 | std::uint32_t(rgb) << 3;
}

InputChannels InputChannels::from_bits(std::uint32_t bits) noexcept {
  return {(bits & 1u) != 0, (bits & 2u) != 0, (bits & 4u) != 0, (bits & 8u) != 0};
}

void SmlConfig::validate() const {
  for (int w : stage_widths) {
    if (w < 2) fail(ErrorCode::kInvalidArgument, "SML stage widths must be >= 2");
  }
  if (input_resolution <= 0 || input_resolution % kSmlSpatialMultiple != 0) {
    fail(ErrorCode::kInvalidArgument, "SML input resolution must be a positive multiple of 16");
  }
}

std::size_t TensorSpec::count() const noexcept {
  std::size_t n = 1;
  for (int d : dims) n *= static_cast<std::size_t>(d);
  return n;
}

namespace {

int head_mid(const SmlConfig& c) { return std::max(1, c.stage_widths[0] / 2); }

class LayoutBuilder {
 public:
  void conv(const std::string& name, int cout, int cin, int k) {
    add(name + ".weight", {cout, cin, k, k});
    add(name + ".bias", {cout});
  }
  void rcu(const std::string& name, int ch) {
    conv(name + ".conv1", ch, ch, 3);
    conv(name + ".conv2", ch, ch, 3);
  }
  std::vector<TensorSpec> take() { return std::move(specs_); }

 private:
  void add(std::string name, std::vector<int> dims) {
    TensorSpec s{std::move(name), std::move(dims), offset_};
    offset_ += s.count();
    specs_.push_back(std::move(s));
  }
  std::vector<TensorSpec> specs_;
  std::size_t offset_ = 0;
};

void add_head(LayoutBuilder& b, const std::string& prefix, const SmlConfig& c) {
  const int w0 = c.stage_widths[0];
  b.conv(prefix + ".conv1", head_mid(c), w0, 3);
  b.conv(prefix + ".conv2", w0, head_mid(c), 3);
  b.conv(prefix + ".out", 1, w0, 1);
}

std::string stage_name(int i) { return "encoder." + std::to_string(i); }
std::string fusion_name(int i) { return "fusion." + std::to_string(i); }

}  // namespace

std::vector<TensorSpec> parameter_layout(const SmlConfig& config) {
  config.validate();
  LayoutBuilder b;
  int cin = config.in_channels();
  for (int i = 0; i < 4; ++i) {
    const int w = config.stage_widths[i];
    b.conv(stage_name(i) + ".conv1", w, cin, 3);
    b.conv(stage_name(i) + ".conv2", w, w, 3);
    cin = w;
  }
  for (int j = 3; j >= 0; --j) {
    const int w = config.stage_widths[j];
    const int out = j > 0 ? config.stage_widths[j - 1] : w;
    b.rcu(fusion_name(j) + ".rcu1", w);
    b.rcu(fusion_name(j) + ".rcu2", w);
    b.conv(fusion_name(j) + ".proj", out, w, 1);
  }
  add_head(b, "head", config);
  if (config.regress_shift) add_head(b, "shift_head", config);
  return b.take();
}

SmlWeights SmlWeights::initialize(const SmlConfig& config, std::uint64_t seed,
                                  bool zero_output_head) {
  SmlWeights w;
  w.config = config;
  w.layout = parameter_layout(config);
  std::size_t total = 0;
  for (const auto& s : w.layout) total += s.count();
  w.values.assign(total, 0.0f);

  std::mt19937_64 rng(seed);
  for (const auto& s : w.layout) {
    if (s.dims.size() != 4) continue;  // biases stay zero
    const bool output_head = s.name == "head.out.weight" || s.name == "shift_head.out.weight";
    if (output_head && zero_output_head) continue;
    const double fan_in = static_cast<double>(s.dims[1]) * s.dims[2] * s.dims[3];
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (std::size_t i = 0; i < s.count(); ++i) {
      w.values[s.offset + i] = static_cast<float>(dist(rng));
    }
  }
  return w;
}

const TensorSpec& SmlWeights::spec(std::string_view name) const {
  for (const auto& s : layout) {
    if (s.name == name) return s;
  }
  fail(ErrorCode::kInvalidArgument, "no SML tensor named '" + std::string(name) + "'");
}

std::span<const float> SmlWeights::tensor(std::string_view name) const {
  const auto& s = spec(name);
  return std::span<const float>(values).subspan(s.offset, s.count());
}

std::span<float> SmlWeights::tensor(std::string_view name) {
  const auto& s = spec(name);
  return std::span<float>(values).subspan(s.offset, s.count());
}

// ---------------------------------------------------------------------------

template <typename T>
struct SmlNetwork<T>::Impl {
  struct Conv {
    int cin = 0, cout = 0, k = 0, stride = 1;
    std::size_t w_off = 0, w_len = 0, b_off = 0;
    Tensor<T> input;
  };

  struct Rcu {
    Conv c1, c2;
    Tensor<T> a1, a2;
  };

  struct Stage {
    Conv c1, c2;
    Tensor<T> a1, a2;  // a2 is the skip output
  };

  struct Fusion {
    Rcu rcu1, rcu2;
    Conv proj;
    bool upsample = true;
    int pre_h = 0, pre_w = 0;
  };

  struct Head {
    Conv c1, c2, out;
    Tensor<T> a2;
    int pre_h = 0, pre_w = 0;
  };

  SmlConfig config;
  std::vector<TensorSpec> layout;
  std::vector<T> params;
  std::vector<T> grads;
  std::array<Stage, 4> stages;
  std::array<Fusion, 4> fusions;
  Head head;
  Head shift_head;

  const TensorSpec& find(const std::string& name) const {
    for (const auto& s : layout) {
      if (s.name == name) return s;
    }
    fail(ErrorCode::kInvalidArgument, "missing SML tensor '" + name + "'");
  }

  Conv make_conv(const std::string& name, int stride) const {
    const auto& w = find(name + ".weight");
    const auto& b = find(name + ".bias");
    Conv c;
    c.cout = w.dims[0];
    c.cin = w.dims[1];
    c.k = w.dims[2];
    c.stride = stride;
    c.w_off = w.offset;
    c.w_len = w.count();
    c.b_off = b.offset;
    return c;
  }

  Head make_head(const std::string& prefix) const {
    Head h;
    h.c1 = make_conv(prefix + ".conv1", 1);
    h.c2 = make_conv(prefix + ".conv2", 1);
    h.out = make_conv(prefix + ".out", 1);
    return h;
  }

  void build() {
    for (int i = 0; i < 4; ++i) {
      stages[i].c1 = make_conv(stage_name(i) + ".conv1", 1);
      stages[i].c2 = make_conv(stage_name(i) + ".conv2", 2);
    }
    for (int j = 0; j < 4; ++j) {
      auto& f = fusions[j];
      f.rcu1.c1 = make_conv(fusion_name(j) + ".rcu1.conv1", 1);
      f.rcu1.c2 = make_conv(fusion_name(j) + ".rcu1.conv2", 1);
      f.rcu2.c1 = make_conv(fusion_name(j) + ".rcu2.conv1", 1);
      f.rcu2.c2 = make_conv(fusion_name(j) + ".rcu2.conv2", 1);
      f.proj = make_conv(fusion_name(j) + ".proj", 1);
      f.upsample = j > 0;
    }
    head = make_head("head");
    if (config.regress_shift) shift_head = make_head("shift_head");
  }

  Tensor<T> conv(Conv& c, const Tensor<T>& x) {
    c.input = x;
    Tensor<T> y;
    conv2d_forward<T>(x, std::span<const T>(params).subspan(c.w_off, c.w_len),
                      std::span<const T>(params).subspan(c.b_off, c.cout), c.cout, c.k, c.stride,
                      y);
    return y;
  }

  Tensor<T> conv_back(Conv& c, const Tensor<T>& dy, bool need_dx) {
    Tensor<T> dx;
    conv2d_backward<T>(c.input, std::span<const T>(params).subspan(c.w_off, c.w_len), dy, c.k,
                       c.stride, need_dx ? &dx : nullptr,
                       std::span<T>(grads).subspan(c.w_off, c.w_len),
                       std::span<T>(grads).subspan(c.b_off, c.cout));
    return dx;
  }

  // x + ReLU(conv2(ReLU(conv1(x))))
  Tensor<T> rcu_forward(Rcu& r, const Tensor<T>& x) {
    r.a1 = conv(r.c1, x);
    relu_inplace(r.a1);
    r.a2 = conv(r.c2, r.a1);
    relu_inplace(r.a2);
    Tensor<T> out = r.a2;
    add_inplace(out, x);
    return out;
  }

  Tensor<T> rcu_backward(Rcu& r, const Tensor<T>& dout) {
    Tensor<T> d = dout;
    relu_backward_inplace(r.a2, d);
    Tensor<T> da1 = conv_back(r.c2, d, true);
    relu_backward_inplace(r.a1, da1);
    Tensor<T> dx = conv_back(r.c1, da1, true);
    add_inplace(dx, dout);
    return dx;
  }

  Tensor<T> head_forward(Head& h, const Tensor<T>& x) {
    Tensor<T> h1 = conv(h.c1, x);
    h.pre_h = h1.h;
    h.pre_w = h1.w;
    h.a2 = conv(h.c2, upsample2x(h1));
    relu_inplace(h.a2);
    return conv(h.out, h.a2);
  }

  Tensor<T> head_backward(Head& h, const Tensor<T>& dout) {
    Tensor<T> da2 = conv_back(h.out, dout, true);
    relu_backward_inplace(h.a2, da2);
    Tensor<T> du = conv_back(h.c2, da2, true);
    Tensor<T> dh1 = upsample2x_backward(du, h.pre_h, h.pre_w);
    return conv_back(h.c1, dh1, true);
  }

  static void hash_relu(std::uint64_t& h, const Tensor<T>& t) {
    for (T v : t.data) {
      h ^= v > T{0} ? 0x9eu : 0x3bu;
      h *= 1099511628211ull;
    }
  }

  std::uint64_t signature() const {
    std::uint64_t h = 1469598103934665603ull;
    for (const auto& s : stages) {
      hash_relu(h, s.a1);
      hash_relu(h, s.a2);
    }
    for (const auto& f : fusions) {
      hash_relu(h, f.rcu1.a1);
      hash_relu(h, f.rcu1.a2);
      hash_relu(h, f.rcu2.a1);
      hash_relu(h, f.rcu2.a2);
    }
    hash_relu(h, head.a2);
    if (config.regress_shift) hash_relu(h, shift_head.a2);
    return h;
  }

  Output forward(const Tensor<T>& input) {
    if (input.c != config.in_channels()) {
      fail(ErrorCode::kShapeMismatch, "SML expects " + std::to_string(config.in_channels()) +
                                          " input channels, got " + std::to_string(input.c));
    }
    if (input.h <= 0 || input.w <= 0 || input.h % kSmlSpatialMultiple != 0 ||
        input.w % kSmlSpatialMultiple != 0) {
      fail(ErrorCode::kShapeMismatch, "SML input dims must be positive multiples of 16");
    }

    Tensor<T> x = input;
    for (auto& s : stages) {
      s.a1 = conv(s.c1, x);
      relu_inplace(s.a1);
      s.a2 = conv(s.c2, s.a1);
      relu_inplace(s.a2);
      x = s.a2;
    }

    Tensor<T> prev;
    for (int j = 3; j >= 0; --j) {
      auto& f = fusions[j];
      Tensor<T> s = rcu_forward(f.rcu1, stages[j].a2);
      if (j < 3) add_inplace(s, prev);
      s = rcu_forward(f.rcu2, s);
      f.pre_h = s.h;
      f.pre_w = s.w;
      if (f.upsample) s = upsample2x(s);
      prev = conv(f.proj, s);
    }

    Output out;
    out.residual = head_forward(head, prev);
    if (config.regress_shift) out.shift = head_forward(shift_head, prev);
    return out;
  }

  void backward(const Tensor<T>& d_residual, const Tensor<T>* d_shift) {
    Tensor<T> dprev = head_backward(head, d_residual);
    if (config.regress_shift && d_shift != nullptr) {
      add_inplace(dprev, head_backward(shift_head, *d_shift));
    }

    std::array<Tensor<T>, 4> dskip;
    for (int j = 0; j <= 3; ++j) {
      auto& f = fusions[j];
      Tensor<T> ds = conv_back(f.proj, dprev, true);
      if (f.upsample) ds = upsample2x_backward(ds, f.pre_h, f.pre_w);
      ds = rcu_backward(f.rcu2, ds);
      dskip[j] = rcu_backward(f.rcu1, ds);
      if (j < 3) dprev = std::move(ds);
    }

    Tensor<T> dx;
    for (int i = 3; i >= 0; --i) {
      auto& s = stages[i];
      Tensor<T> d = std::move(dskip[i]);
      if (i < 3) add_inplace(d, dx);
      relu_backward_inplace(s.a2, d);
      Tensor<T> da1 = conv_back(s.c2, d, true);
      relu_backward_inplace(s.a1, da1);
      dx = conv_back(s.c1, da1, i > 0);
    }
  }
};

template <typename T>
SmlNetwork<T>::SmlNetwork(const SmlWeights& weights) : impl_(std::make_unique<Impl>()) {
  weights.config.validate();
  impl_->config = weights.config;
  impl_->layout = parameter_layout(weights.config);
  std::size_t total = 0;
  for (const auto& s : impl_->layout) total += s.count();
  if (weights.values.size() != total) {
    fail(ErrorCode::kShapeMismatch, "SML weight count " + std::to_string(weights.values.size()) +
                                        " does not match config (" + std::to_string(total) + ")");
  }
  impl_->params.assign(weights.values.begin(), weights.values.end());
  impl_->grads.assign(total, T{0});
  impl_->build();
}

template <typename T>
SmlNetwork<T>::~SmlNetwork() = default;
template <typename T>
SmlNetwork<T>::SmlNetwork(SmlNetwork&&) noexcept = default;
template <typename T>
SmlNetwork<T>& SmlNetwork<T>::operator=(SmlNetwork&&) noexcept = default;

template <typename T>
const SmlConfig& SmlNetwork<T>::config() const noexcept {
  return impl_->config;
}

template <typename T>
const std::vector<TensorSpec>& SmlNetwork<T>::layout() const noexcept {
  return impl_->layout;
}

template <typename T>
std::span<T> SmlNetwork<T>::parameters() noexcept {
  return impl_->params;
}

template <typename T>
std::span<const T> SmlNetwork<T>::parameters() const noexcept {
  return impl_->params;
}

template <typename T>
std::span<T> SmlNetwork<T>::gradients() noexcept {
  return impl_->grads;
}

template <typename T>
void SmlNetwork<T>::zero_grad() noexcept {
  std::fill(impl_->grads.begin(), impl_->grads.end(), T{0});
}

template <typename T>
SmlWeights SmlNetwork<T>::to_weights() const {
  SmlWeights w;
  w.config = impl_->config;
  w.layout = impl_->layout;
  w.values.resize(impl_->params.size());
  std::transform(impl_->params.begin(), impl_->params.end(), w.values.begin(),
                 [](T v) { return static_cast<float>(v); });
  return w;
}

template <typename T>
typename SmlNetwork<T>::Output SmlNetwork<T>::forward(const Tensor<T>& input) {
  return impl_->forward(input);
}

template <typename T>
void SmlNetwork<T>::backward(const Tensor<T>& d_residual, const Tensor<T>* d_shift) {
  impl_->backward(d_residual, d_shift);
}

template <typename T>
std::uint64_t SmlNetwork<T>::activation_signature() const {
  return impl_->signature();
}

template class SmlNetwork<float>;
template class SmlNetwork<double>;

// ---------------------------------------------------------------------------

template <typename T>
std::vector<T> assemble_channels(const SmlConfig& config, const SmlFrameChannels& ch) {
  const int w = ch.z_tilde.width();
  const int h = ch.z_tilde.height();
  require_same_shape(ch.z_tilde, ch.scaffold, "scaffold channel");
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  std::vector<T> out;
  out.reserve(plane * static_cast<std::size_t>(config.in_channels()));

  auto push = [&](const Grid<double>& g, double offset, std::string_view what) {
    require_same_shape(ch.z_tilde, g, what);
    for (double v : g.values()) out.push_back(static_cast<T>(v - offset));
  };
  push(ch.z_tilde, 0.0, "aligned depth channel");
  push(ch.scaffold, 1.0, "scaffold channel");
  if (config.extra.confidence) push(ch.confidence, 0.0, "confidence channel");
  if (config.extra.gradients) push(ch.gradients, 0.0, "gradient channel");
  if (config.extra.grayscale) push(ch.gray, 0.0, "grayscale channel");
  if (config.extra.rgb) {
    require_same_shape(ch.z_tilde, ch.rgb, "rgb channels");
    for (double Rgb::*c : {&Rgb::r, &Rgb::g, &Rgb::b}) {
      for (const Rgb& p : ch.rgb.values()) out.push_back(static_cast<T>(p.*c));
    }
  }
  return out;
}

template <typename T>
Tensor<T> stack_inputs(std::span<const std::vector<T>> frames, int channels, int height,
                       int width) {
  Tensor<T> t(static_cast<int>(frames.size()), channels, height, width);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (frames[i].size() != t.sample_size()) {
      fail(ErrorCode::kShapeMismatch, "input frame channel stack has the wrong size");
    }
    std::copy(frames[i].begin(), frames[i].end(), t.sample(static_cast<int>(i)));
  }
  return t;
}

template std::vector<float> assemble_channels<float>(const SmlConfig&, const SmlFrameChannels&);
template std::vector<double> assemble_channels<double>(const SmlConfig&, const SmlFrameChannels&);
template Tensor<float> stack_inputs<float>(std::span<const std::vector<float>>, int, int, int);
template Tensor<double> stack_inputs<double>(std::span<const std::vector<double>>, int, int, int);

InverseDepthMap apply_residual(const InverseDepthMap& z_tilde, const Grid<double>& residual,
                               const Grid<double>* shift, const ClampProfile& profile) {
  require_same_shape(z_tilde, residual, "residual map");
  if (shift != nullptr) require_same_shape(z_tilde, *shift, "shift map");
  InverseDepthMap out(z_tilde.width(), z_tilde.height());
  for (std::size_t i = 0; i < z_tilde.size(); ++i) {
    const double t = shift != nullptr ? (*shift)[i] : 0.0;
    out[i] = clamp_inverse(scaled_inverse(z_tilde[i], residual[i], t), profile);
  }
  return out;
}

}  // namespace mvid
