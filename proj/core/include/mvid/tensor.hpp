#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mvid/error.hpp"

namespace mvid {

// Dense NCHW tensor.
template <typename T>
struct Tensor {
  int n = 0;
  int c = 0;
  int h = 0;
  int w = 0;
  std::vector<T> data;

  Tensor() = default;
  Tensor(int n_, int c_, int h_, int w_, T fill = T{})
      : n(n_), c(c_), h(h_), w(w_),
        data(static_cast<std::size_t>(n_) * c_ * h_ * w_, fill) {}

  std::size_t plane_size() const noexcept { return static_cast<std::size_t>(h) * w; }
  std::size_t sample_size() const noexcept { return static_cast<std::size_t>(c) * plane_size(); }
  std::size_t size() const noexcept { return data.size(); }

  T* sample(int i) noexcept { return data.data() + static_cast<std::size_t>(i) * sample_size(); }
  const T* sample(int i) const noexcept {
    return data.data() + static_cast<std::size_t>(i) * sample_size();
  }
  T* plane(int i, int ch) noexcept { return sample(i) + static_cast<std::size_t>(ch) * plane_size(); }
  const T* plane(int i, int ch) const noexcept {
    return sample(i) + static_cast<std::size_t>(ch) * plane_size();
  }
  T& at(int i, int ch, int y, int x) noexcept {
    return plane(i, ch)[static_cast<std::size_t>(y) * w + x];
  }
  const T& at(int i, int ch, int y, int x) const noexcept {
    return plane(i, ch)[static_cast<std::size_t>(y) * w + x];
  }

  bool same_shape(const Tensor& o) const noexcept {
    return n == o.n && c == o.c && h == o.h && w == o.w;
  }
};

// Square-kernel convolution with zero padding k/2. Weight layout is
// [cout][cin][k][k]; output spatial size is ceil(in / stride).
template <typename T>
void conv2d_forward(const Tensor<T>& x, std::span<const T> weight, std::span<const T> bias,
                    int cout, int k, int stride, Tensor<T>& y);

// Accumulates into d_weight / d_bias; overwrites dx (skipped when dx is null).
template <typename T>
void conv2d_backward(const Tensor<T>& x, std::span<const T> weight, const Tensor<T>& dy, int k,
                     int stride, Tensor<T>* dx, std::span<T> d_weight, std::span<T> d_bias);

template <typename T>
void relu_inplace(Tensor<T>& x);

// dx = dy where y > 0, else 0.
template <typename T>
void relu_backward_inplace(const Tensor<T>& y, Tensor<T>& dy);

// 2x bilinear upsampling with aligned corners.
template <typename T>
Tensor<T> upsample2x(const Tensor<T>& x);

template <typename T>
Tensor<T> upsample2x_backward(const Tensor<T>& dy, int in_h, int in_w);

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b);

}  // namespace mvid
