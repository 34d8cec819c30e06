#include "mvid/tensor.hpp"

#include <Eigen/Core>
#include <algorithm>

namespace mvid {
namespace {

template <typename T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatrixMap = Eigen::Map<RowMatrix<T>>;
template <typename T>
using ConstMatrixMap = Eigen::Map<const RowMatrix<T>>;

int out_extent(int in, int k, int stride) { return (in + 2 * (k / 2) - k) / stride + 1; }

// cols is (cin*k*k) x (ho*wo), row-major.
template <typename T>
void im2col(const T* src, int cin, int h, int w, int k, int stride, int ho, int wo, T* cols) {
  const int pad = k / 2;
  const std::size_t p = static_cast<std::size_t>(ho) * wo;
  for (int ci = 0; ci < cin; ++ci) {
    const T* plane = src + static_cast<std::size_t>(ci) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* row = cols + (static_cast<std::size_t>(ci * k + ky) * k + kx) * p;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ky - pad;
          T* out = row + static_cast<std::size_t>(oy) * wo;
          if (iy < 0 || iy >= h) {
            std::fill(out, out + wo, T{0});
            continue;
          }
          const T* in = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride + kx - pad;
            out[ox] = (ix >= 0 && ix < w) ? in[ix] : T{0};
          }
        }
      }
    }
  }
}

template <typename T>
void col2im(const T* cols, int cin, int h, int w, int k, int stride, int ho, int wo, T* dst) {
  const int pad = k / 2;
  const std::size_t p = static_cast<std::size_t>(ho) * wo;
  std::fill(dst, dst + static_cast<std::size_t>(cin) * h * w, T{0});
  for (int ci = 0; ci < cin; ++ci) {
    T* plane = dst + static_cast<std::size_t>(ci) * h * w;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* row = cols + (static_cast<std::size_t>(ci * k + ky) * k + kx) * p;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          const T* in = row + static_cast<std::size_t>(oy) * wo;
          T* out = plane + static_cast<std::size_t>(iy) * w;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < w) out[ix] += in[ox];
          }
        }
      }
    }
  }
}

bool is_pointwise(int k, int stride) { return k == 1 && stride == 1; }

}  // namespace

template <typename T>
void conv2d_forward(const Tensor<T>& x, std::span<const T> weight, std::span<const T> bias,
                    int cout, int k, int stride, Tensor<T>& y) {
  const std::size_t kdim = static_cast<std::size_t>(x.c) * k * k;
  if (weight.size() != static_cast<std::size_t>(cout) * kdim ||
      bias.size() != static_cast<std::size_t>(cout)) {
    fail(ErrorCode::kShapeMismatch, "conv2d weight shape does not match input channels");
  }
  const int ho = out_extent(x.h, k, stride);
  const int wo = out_extent(x.w, k, stride);
  y = Tensor<T>(x.n, cout, ho, wo);
  const std::size_t p = static_cast<std::size_t>(ho) * wo;

  ConstMatrixMap<T> wmat(weight.data(), cout, static_cast<Eigen::Index>(kdim));
  std::vector<T> cols(is_pointwise(k, stride) ? 0 : kdim * p);
  for (int i = 0; i < x.n; ++i) {
    const T* colsrc = x.sample(i);
    if (!is_pointwise(k, stride)) {
      im2col(x.sample(i), x.c, x.h, x.w, k, stride, ho, wo, cols.data());
      colsrc = cols.data();
    }
    ConstMatrixMap<T> cmat(colsrc, static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(p));
    MatrixMap<T> ymat(y.sample(i), cout, static_cast<Eigen::Index>(p));
    ymat.noalias() = wmat * cmat;
    for (int co = 0; co < cout; ++co) ymat.row(co).array() += bias[co];
  }
}

template <typename T>
void conv2d_backward(const Tensor<T>& x, std::span<const T> weight, const Tensor<T>& dy, int k,
                     int stride, Tensor<T>* dx, std::span<T> d_weight, std::span<T> d_bias) {
  const int cout = dy.c;
  const std::size_t kdim = static_cast<std::size_t>(x.c) * k * k;
  const std::size_t p = static_cast<std::size_t>(dy.h) * dy.w;
  ConstMatrixMap<T> wmat(weight.data(), cout, static_cast<Eigen::Index>(kdim));
  MatrixMap<T> dwmat(d_weight.data(), cout, static_cast<Eigen::Index>(kdim));

  if (dx != nullptr) *dx = Tensor<T>(x.n, x.c, x.h, x.w);
  const bool pointwise = is_pointwise(k, stride);
  std::vector<T> cols(pointwise ? 0 : kdim * p);
  std::vector<T> dcols(pointwise || dx == nullptr ? 0 : kdim * p);

  for (int i = 0; i < x.n; ++i) {
    const T* colsrc = x.sample(i);
    if (!pointwise) {
      im2col(x.sample(i), x.c, x.h, x.w, k, stride, dy.h, dy.w, cols.data());
      colsrc = cols.data();
    }
    ConstMatrixMap<T> cmat(colsrc, static_cast<Eigen::Index>(kdim), static_cast<Eigen::Index>(p));
    ConstMatrixMap<T> dymat(dy.sample(i), cout, static_cast<Eigen::Index>(p));
    dwmat.noalias() += dymat * cmat.transpose();
    for (int co = 0; co < cout; ++co) d_bias[co] += dymat.row(co).sum();

    if (dx == nullptr) continue;
    if (pointwise) {
      MatrixMap<T> dxmat(dx->sample(i), x.c, static_cast<Eigen::Index>(p));
      dxmat.noalias() = wmat.transpose() * dymat;
    } else {
      MatrixMap<T> dcmat(dcols.data(), static_cast<Eigen::Index>(kdim),
                         static_cast<Eigen::Index>(p));
      dcmat.noalias() = wmat.transpose() * dymat;
      col2im(dcols.data(), x.c, x.h, x.w, k, stride, dy.h, dy.w, dx->sample(i));
    }
  }
}

template <typename T>
void relu_inplace(Tensor<T>& x) {
  for (auto& v : x.data) v = v > T{0} ? v : T{0};
}

template <typename T>
void relu_backward_inplace(const Tensor<T>& y, Tensor<T>& dy) {
  for (std::size_t i = 0; i < dy.data.size(); ++i) {
    if (!(y.data[i] > T{0})) dy.data[i] = T{0};
  }
}

namespace {

struct LerpTap {
  int lo;
  int hi;
  double frac;
};

std::vector<LerpTap> aligned_taps(int in, int out) {
  std::vector<LerpTap> taps(static_cast<std::size_t>(out));
  const double ratio = out > 1 ? static_cast<double>(in - 1) / (out - 1) : 0.0;
  for (int o = 0; o < out; ++o) {
    const double src = o * ratio;
    const int lo = std::min(static_cast<int>(src), in - 1);
    const int hi = std::min(lo + 1, in - 1);
    taps[o] = {lo, hi, src - lo};
  }
  return taps;
}

}  // namespace

template <typename T>
Tensor<T> upsample2x(const Tensor<T>& x) {
  Tensor<T> y(x.n, x.c, 2 * x.h, 2 * x.w);
  const auto ty = aligned_taps(x.h, y.h);
  const auto tx = aligned_taps(x.w, y.w);
  for (int i = 0; i < x.n; ++i) {
    for (int ch = 0; ch < x.c; ++ch) {
      const T* src = x.plane(i, ch);
      T* dst = y.plane(i, ch);
      for (int oy = 0; oy < y.h; ++oy) {
        const T fy = static_cast<T>(ty[oy].frac);
        const T* r0 = src + static_cast<std::size_t>(ty[oy].lo) * x.w;
        const T* r1 = src + static_cast<std::size_t>(ty[oy].hi) * x.w;
        for (int ox = 0; ox < y.w; ++ox) {
          const T fx = static_cast<T>(tx[ox].frac);
          const T top = r0[tx[ox].lo] * (T{1} - fx) + r0[tx[ox].hi] * fx;
          const T bot = r1[tx[ox].lo] * (T{1} - fx) + r1[tx[ox].hi] * fx;
          dst[static_cast<std::size_t>(oy) * y.w + ox] = top * (T{1} - fy) + bot * fy;
        }
      }
    }
  }
  return y;
}

template <typename T>
Tensor<T> upsample2x_backward(const Tensor<T>& dy, int in_h, int in_w) {
  Tensor<T> dx(dy.n, dy.c, in_h, in_w);
  const auto ty = aligned_taps(in_h, dy.h);
  const auto tx = aligned_taps(in_w, dy.w);
  for (int i = 0; i < dy.n; ++i) {
    for (int ch = 0; ch < dy.c; ++ch) {
      const T* src = dy.plane(i, ch);
      T* dst = dx.plane(i, ch);
      for (int oy = 0; oy < dy.h; ++oy) {
        const T fy = static_cast<T>(ty[oy].frac);
        T* r0 = dst + static_cast<std::size_t>(ty[oy].lo) * in_w;
        T* r1 = dst + static_cast<std::size_t>(ty[oy].hi) * in_w;
        for (int ox = 0; ox < dy.w; ++ox) {
          const T fx = static_cast<T>(tx[ox].frac);
          const T g = src[static_cast<std::size_t>(oy) * dy.w + ox];
          const T gt = g * (T{1} - fy);
          const T gb = g * fy;
          r0[tx[ox].lo] += gt * (T{1} - fx);
          r0[tx[ox].hi] += gt * fx;
          r1[tx[ox].lo] += gb * (T{1} - fx);
          r1[tx[ox].hi] += gb * fx;
        }
      }
    }
  }
  return dx;
}

template <typename T>
void add_inplace(Tensor<T>& a, const Tensor<T>& b) {
  if (!a.same_shape(b)) fail(ErrorCode::kShapeMismatch, "tensor add shape mismatch");
  for (std::size_t i = 0; i < a.data.size(); ++i) a.data[i] += b.data[i];
}

#define MVID_INSTANTIATE_TENSOR_OPS(T)                                                        \
  template void conv2d_forward<T>(const Tensor<T>&, std::span<const T>, std::span<const T>,   \
                                  int, int, int, Tensor<T>&);                                 \
  template void conv2d_backward<T>(const Tensor<T>&, std::span<const T>, const Tensor<T>&,    \
                                   int, int, Tensor<T>*, std::span<T>, std::span<T>);         \
  template void relu_inplace<T>(Tensor<T>&);                                                  \
  template void relu_backward_inplace<T>(const Tensor<T>&, Tensor<T>&);                       \
  template Tensor<T> upsample2x<T>(const Tensor<T>&);                                         \
  template Tensor<T> upsample2x_backward<T>(const Tensor<T>&, int, int);                      \
  template void add_inplace<T>(Tensor<T>&, const Tensor<T>&);

MVID_INSTANTIATE_TENSOR_OPS(float)
MVID_INSTANTIATE_TENSOR_OPS(double)

#undef MVID_INSTANTIATE_TENSOR_OPS

}  // namespace mvid
