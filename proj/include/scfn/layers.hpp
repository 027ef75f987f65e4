#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "scfn/kernels.hpp"
#include "scfn/rng.hpp"
#include "scfn/tensor.hpp"

namespace scfn {

enum class Mode { kTrain, kEval };

/// 3x3 convolution parameters: weights [3,3,c_in,c_out], bias [c_out].
template <typename T>
struct ConvParams {
  Tensor<T> weights;
  Tensor<T> bias;
  int in_channels() const { return weights.extent(2); }
  int out_channels() const { return weights.extent(3); }
};

/// Dense parameters: weights [f_in, units], bias [units].
template <typename T>
struct DenseParams {
  Tensor<T> weights;
  Tensor<T> bias;
  int in_features() const { return weights.extent(0); }
  int units() const { return weights.extent(1); }
};

template <typename T>
struct ConvGrads {
  Tensor<T> dx, dw, db;
};

template <typename T>
struct DenseGrads {
  Tensor<T> dx, dw, db;
};

namespace detail {

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

}  // namespace detail

/// Valid-padding stride-1 convolution:
/// y[n,i,j,o] = bias[o] + sum_{di,dj,c} x[n,i+di,j+dj,c] * w[di,dj,c,o].
/// Images are processed in parallel; each runs im2col + a serial GEMM.
template <typename T>
Tensor<T> conv2d_forward(const Tensor<T>& x, const ConvParams<T>& p) {
  detail::require(x.rank() == 4, "conv2d: input must be [N,H,W,C]");
  const int n = x.extent(0), h = x.extent(1), w = x.extent(2), ci = x.extent(3);
  detail::require(h >= 3 && w >= 3, "conv2d: spatial extent must be >= 3");
  detail::require(ci == p.in_channels(), "conv2d: channel mismatch");
  const int co = p.out_channels();
  const int ho = h - 2, wo = w - 2;
  const int hw = ho * wo;
  const std::size_t patch = static_cast<std::size_t>(9) * ci;

  Tensor<T> y({n, ho, wo, co});
  const T* bias = p.bias.data();

#pragma omp parallel for schedule(static)
  for (int img = 0; img < n; ++img) {
    std::vector<T>& col = kernels::scratch<T>(0);
    col.resize(static_cast<std::size_t>(hw) * patch);
    const T* xn = x.data() + static_cast<std::size_t>(img) * h * w * ci;
    T* yn = y.data() + static_cast<std::size_t>(img) * hw * co;
    kernels::im2col3x3(xn, h, w, ci, col.data());
    for (int r = 0; r < hw; ++r)
      for (int o = 0; o < co; ++o) yn[static_cast<std::size_t>(r) * co + o] = bias[o];
    kernels::gemm(col.data(), p.weights.data(), yn, hw, static_cast<int>(patch), co,
                  true, false);
  }
  return y;
}

/// Exact gradients of conv2d_forward. The cache is the forward input.
/// dw/db accumulate per-image partials that are then summed in image order.
template <typename T>
ConvGrads<T> conv2d_backward(const Tensor<T>& x, const ConvParams<T>& p,
                             const Tensor<T>& dy) {
  const int n = x.extent(0), h = x.extent(1), w = x.extent(2), ci = x.extent(3);
  const int co = p.out_channels();
  const int ho = h - 2, wo = w - 2;
  detail::require(dy.rank() == 4 && dy.extent(0) == n && dy.extent(1) == ho &&
                      dy.extent(2) == wo && dy.extent(3) == co,
                  "conv2d_backward: dy shape does not match forward output");
  const int hw = ho * wo;
  const int patch = 9 * ci;

  ConvGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(p.weights.shape()),
                 Tensor<T>(p.bias.shape())};

  // w[patch, co] transposed once for the dcol GEMM.
  std::vector<T> wt(static_cast<std::size_t>(co) * patch);
  kernels::transpose(p.weights.data(), wt.data(), patch, co);

  std::vector<T> dw_part(static_cast<std::size_t>(n) * patch * co);
  std::vector<T> db_part(static_cast<std::size_t>(n) * co);

#pragma omp parallel for schedule(static)
  for (int img = 0; img < n; ++img) {
    std::vector<T>& col = kernels::scratch<T>(0);
    std::vector<T>& dcol = kernels::scratch<T>(1);
    col.resize(static_cast<std::size_t>(hw) * patch);
    dcol.resize(static_cast<std::size_t>(hw) * patch);

    const T* xn = x.data() + static_cast<std::size_t>(img) * h * w * ci;
    const T* dyn = dy.data() + static_cast<std::size_t>(img) * hw * co;
    T* dxn = g.dx.data() + static_cast<std::size_t>(img) * h * w * ci;

    kernels::im2col3x3(xn, h, w, ci, col.data());
    kernels::gemm_at(col.data(), dyn, dw_part.data() + static_cast<std::size_t>(img) * patch * co,
                     hw, patch, co, false, false);

    T* dbp = db_part.data() + static_cast<std::size_t>(img) * co;
    for (int o = 0; o < co; ++o) dbp[o] = T(0);
    for (int r = 0; r < hw; ++r)
      for (int o = 0; o < co; ++o) dbp[o] += dyn[static_cast<std::size_t>(r) * co + o];

    kernels::gemm(dyn, wt.data(), dcol.data(), hw, co, patch, false, false);
    kernels::col2im3x3_add(dcol.data(), h, w, ci, dxn);
  }

  // Ascending image order keeps the parameter-gradient reduction fixed.
  for (int img = 0; img < n; ++img) {
    const T* dwp = dw_part.data() + static_cast<std::size_t>(img) * patch * co;
    for (std::size_t q = 0; q < g.dw.size(); ++q) g.dw[q] += dwp[q];
    const T* dbp = db_part.data() + static_cast<std::size_t>(img) * co;
    for (int o = 0; o < co; ++o) g.db[o] += dbp[o];
  }
  return g;
}

/// Elementwise max(0, x).
template <typename T>
Tensor<T> relu_forward(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  const std::size_t sz = x.size();
#pragma omp parallel for schedule(static) if (sz > 65536)
  for (long long i = 0; i < static_cast<long long>(sz); ++i)
    y[static_cast<std::size_t>(i)] = x[static_cast<std::size_t>(i)] > T(0)
                                         ? x[static_cast<std::size_t>(i)]
                                         : T(0);
  return y;
}

/// dx = dy where the forward output was positive, else 0 (the subgradient
/// at 0 is taken as 0, and y > 0 iff x > 0).
template <typename T>
Tensor<T> relu_backward(const Tensor<T>& y, const Tensor<T>& dy) {
  detail::require(y.same_shape(dy), "relu_backward: shape mismatch");
  Tensor<T> dx(dy.shape());
  const std::size_t sz = dy.size();
#pragma omp parallel for schedule(static) if (sz > 65536)
  for (long long i = 0; i < static_cast<long long>(sz); ++i)
    dx[static_cast<std::size_t>(i)] =
        y[static_cast<std::size_t>(i)] > T(0) ? dy[static_cast<std::size_t>(i)] : T(0);
  return dx;
}

/// Global average pooling: y[n,c] = mean over (h,w) of x[n,.,.,c].
/// Per-channel sums accumulate in double, (i,j) ascending.
template <typename T>
Tensor<T> gap_forward(const Tensor<T>& x) {
  detail::require(x.rank() == 4, "gap: input must be [N,h,w,d]");
  const int n = x.extent(0), h = x.extent(1), w = x.extent(2), d = x.extent(3);
  Tensor<T> y({n, d});
  const double inv = 1.0 / (static_cast<double>(h) * w);
#pragma omp parallel for schedule(static)
  for (int img = 0; img < n; ++img) {
    std::vector<double> acc(static_cast<std::size_t>(d), 0.0);
    const T* xn = x.data() + static_cast<std::size_t>(img) * h * w * d;
    for (int p = 0; p < h * w; ++p)
      for (int c = 0; c < d; ++c) acc[static_cast<std::size_t>(c)] += xn[static_cast<std::size_t>(p) * d + c];
    for (int c = 0; c < d; ++c)
      y(img, c) = static_cast<T>(acc[static_cast<std::size_t>(c)] * inv);
  }
  return y;
}

/// Spreads dy[n,c]/(h*w) uniformly over the pooled window.
template <typename T>
Tensor<T> gap_backward(const std::vector<int>& in_shape, const Tensor<T>& dy) {
  detail::require(in_shape.size() == 4, "gap_backward: need [N,h,w,d] input shape");
  const int n = in_shape[0], h = in_shape[1], w = in_shape[2], d = in_shape[3];
  detail::require(dy.rank() == 2 && dy.extent(0) == n && dy.extent(1) == d,
                  "gap_backward: dy shape mismatch");
  Tensor<T> dx(in_shape);
  const T scale = T(1) / static_cast<T>(h * w);
#pragma omp parallel for schedule(static)
  for (int img = 0; img < n; ++img) {
    T* dxn = dx.data() + static_cast<std::size_t>(img) * h * w * d;
    for (int p = 0; p < h * w; ++p)
      for (int c = 0; c < d; ++c)
        dxn[static_cast<std::size_t>(p) * d + c] = dy(img, c) * scale;
  }
  return dx;
}

template <typename T>
struct DropoutResult {
  Tensor<T> y;
  Tensor<T> mask;  // 0 for dropped elements, 1/(1-rate) for survivors
};

/// Inverted dropout. Train mode zeroes each element with probability rate
/// and scales survivors by 1/(1-rate); eval mode is the identity and
/// consumes no randomness.
template <typename T>
DropoutResult<T> dropout_forward(const Tensor<T>& x, double rate, Mode mode,
                                 RngStream& rng) {
  detail::require(rate >= 0.0 && rate < 1.0, "dropout: rate must be in [0,1)");
  if (mode == Mode::kEval) return {x, Tensor<T>(x.shape(), T(1))};
  const T scale = static_cast<T>(1.0 / (1.0 - rate));
  Tensor<T> mask(x.shape());
  for (std::size_t i = 0; i < mask.size(); ++i)
    mask[i] = rng.next_uniform() < rate ? T(0) : scale;
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] * mask[i];
  return {std::move(y), std::move(mask)};
}

/// dx = dy * mask (the mask already carries the 1/(1-rate) scaling).
template <typename T>
Tensor<T> dropout_backward(const Tensor<T>& mask, const Tensor<T>& dy) {
  detail::require(mask.same_shape(dy), "dropout_backward: shape mismatch");
  Tensor<T> dx(dy.shape());
  for (std::size_t i = 0; i < dx.size(); ++i) dx[i] = dy[i] * mask[i];
  return dx;
}

/// y = x * W + b for x [N,f].
template <typename T>
Tensor<T> dense_forward(const Tensor<T>& x, const DenseParams<T>& p) {
  detail::require(x.rank() == 2, "dense: input must be [N,f]");
  detail::require(x.extent(1) == p.in_features(), "dense: feature extent mismatch");
  const int n = x.extent(0), f = p.in_features(), u = p.units();
  Tensor<T> y({n, u});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < u; ++j) y(i, j) = p.bias[static_cast<std::size_t>(j)];
  kernels::gemm(x.data(), p.weights.data(), y.data(), n, f, u, true, true);
  return y;
}

/// dw = x^T dy, dx = dy W^T, db = column sums of dy.
template <typename T>
DenseGrads<T> dense_backward(const Tensor<T>& x, const DenseParams<T>& p,
                             const Tensor<T>& dy) {
  const int n = x.extent(0), f = p.in_features(), u = p.units();
  detail::require(dy.rank() == 2 && dy.extent(0) == n && dy.extent(1) == u,
                  "dense_backward: dy shape mismatch");
  DenseGrads<T> g{Tensor<T>(x.shape()), Tensor<T>(p.weights.shape()),
                  Tensor<T>(p.bias.shape())};
  kernels::gemm_at(x.data(), dy.data(), g.dw.data(), n, f, u, false, true);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < u; ++j) g.db[static_cast<std::size_t>(j)] += dy(i, j);
  std::vector<T> wt(static_cast<std::size_t>(u) * f);
  kernels::transpose(p.weights.data(), wt.data(), f, u);
  kernels::gemm(dy.data(), wt.data(), g.dx.data(), n, u, f, false, true);
  return g;
}

/// Numerically stable logistic: exp is only ever taken of a non-positive
/// argument. Outputs are clamped to the open interval (0,1) representable
/// in T so downstream code can rely on strict bounds.
template <typename T>
Tensor<T> sigmoid_forward(const Tensor<T>& x) {
  Tensor<T> y(x.shape());
  const T lo = std::numeric_limits<T>::denorm_min();
  const T hi = std::nextafter(T(1), T(0));
  for (std::size_t i = 0; i < x.size(); ++i) {
    const T v = x[i];
    T s;
    if (v >= T(0)) {
      s = T(1) / (T(1) + std::exp(-v));
    } else {
      const T e = std::exp(v);
      s = e / (T(1) + e);
    }
    y[i] = s < lo ? lo : (s > hi ? hi : s);
  }
  return y;
}

}  // namespace scfn
