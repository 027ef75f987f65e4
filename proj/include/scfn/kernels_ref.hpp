#pragma once

#include <cstddef>

namespace scfn::ref {

// Serial textbook implementations kept as the reference for the parallel
// kernels. Used by the unit tests and the benchmark target; never on the
// production path.

template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate) {
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      T acc = accumulate ? c[static_cast<std::size_t>(i) * n + j] : T(0);
      for (int t = 0; t < k; ++t)
        acc += a[static_cast<std::size_t>(i) * k + t] * b[static_cast<std::size_t>(t) * n + j];
      c[static_cast<std::size_t>(i) * n + j] = acc;
    }
  }
}

/// Direct 3x3 valid-padding convolution, one image: x[h,w,ci], w[3,3,ci,co].
template <typename T>
void conv2d_forward(const T* x, const T* w, const T* b, T* y, int h, int wd,
                    int ci, int co) {
  const int ho = h - 2, wo = wd - 2;
  for (int i = 0; i < ho; ++i) {
    for (int j = 0; j < wo; ++j) {
      for (int o = 0; o < co; ++o) {
        T acc = b[o];
        for (int di = 0; di < 3; ++di)
          for (int dj = 0; dj < 3; ++dj)
            for (int q = 0; q < ci; ++q)
              acc += x[(static_cast<std::size_t>(i + di) * wd + (j + dj)) * ci + q] *
                     w[((static_cast<std::size_t>(di) * 3 + dj) * ci + q) * co + o];
        y[(static_cast<std::size_t>(i) * wo + j) * co + o] = acc;
      }
    }
  }
}

/// Direct gradients of conv2d_forward for one image. dx/dw/db must be
/// zero-initialized (dw/db accumulate across images at the call site).
template <typename T>
void conv2d_backward(const T* x, const T* w, const T* dy, T* dx, T* dw, T* db,
                     int h, int wd, int ci, int co) {
  const int ho = h - 2, wo = wd - 2;
  for (int i = 0; i < ho; ++i) {
    for (int j = 0; j < wo; ++j) {
      for (int o = 0; o < co; ++o) {
        const T g = dy[(static_cast<std::size_t>(i) * wo + j) * co + o];
        db[o] += g;
        for (int di = 0; di < 3; ++di) {
          for (int dj = 0; dj < 3; ++dj) {
            for (int q = 0; q < ci; ++q) {
              const std::size_t xi = (static_cast<std::size_t>(i + di) * wd + (j + dj)) * ci + q;
              const std::size_t wi = ((static_cast<std::size_t>(di) * 3 + dj) * ci + q) * co + o;
              dw[wi] += x[xi] * g;
              dx[xi] += w[wi] * g;
            }
          }
        }
      }
    }
  }
}

}  // namespace scfn::ref
