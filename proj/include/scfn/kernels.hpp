#pragma once

#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace scfn::kernels {

// Parallel kernels behind the tensor and layer operations.
//
// Determinism contract: every output element is written by exactly one
// thread and its reduction runs over t in ascending order, so results are
// bitwise identical for any thread count. Parallelism is only ever across
// independent output elements (rows, images), never inside a reduction.

namespace detail {

// Register-blocked panel: rows [i0, i0+MR) of C against all k, columns
// [j0, j0+JW). Bounds are compile-time so the accumulator block stays in
// vector registers; 4x32 gives eight independent FMA chains per row group,
// enough to cover FMA latency.
template <typename T, int MR, int JW>
inline void gemm_panel(const T* a, const T* b, T* c, int k, int n, int i0, int j0,
                       bool accumulate) {
  T acc[MR][JW];
  for (int r = 0; r < MR; ++r)
    for (int j = 0; j < JW; ++j)
      acc[r][j] = accumulate ? c[static_cast<std::size_t>(i0 + r) * n + j0 + j] : T(0);
  for (int t = 0; t < k; ++t) {
    const T* brow = b + static_cast<std::size_t>(t) * n + j0;
    for (int r = 0; r < MR; ++r) {
      const T av = a[static_cast<std::size_t>(i0 + r) * k + t];
      for (int j = 0; j < JW; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (int r = 0; r < MR; ++r)
    for (int j = 0; j < JW; ++j)
      c[static_cast<std::size_t>(i0 + r) * n + j0 + j] = acc[r][j];
}

// Arbitrary-size edge panel (mr <= 4, jw <= 32), runtime bounds. Slow path;
// touches only the fringe of the output.
template <typename T>
inline void gemm_panel_any(const T* a, const T* b, T* c, int k, int n, int i0,
                           int mr, int j0, int jw, bool accumulate) {
  T acc[4][32];
  for (int r = 0; r < mr; ++r)
    for (int j = 0; j < jw; ++j)
      acc[r][j] = accumulate ? c[static_cast<std::size_t>(i0 + r) * n + j0 + j] : T(0);
  for (int t = 0; t < k; ++t) {
    const T* brow = b + static_cast<std::size_t>(t) * n + j0;
    for (int r = 0; r < mr; ++r) {
      const T av = a[static_cast<std::size_t>(i0 + r) * k + t];
      for (int j = 0; j < jw; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (int r = 0; r < mr; ++r)
    for (int j = 0; j < jw; ++j)
      c[static_cast<std::size_t>(i0 + r) * n + j0 + j] = acc[r][j];
}

// Same blocking for C[i,j] = sum_t A[t,i]*B[t,j] with A stored [k,m].
template <typename T, int MR, int JW>
inline void gemm_at_panel(const T* a, const T* b, T* c, int k, int m, int n,
                          int i0, int j0, bool accumulate) {
  T acc[MR][JW];
  for (int r = 0; r < MR; ++r)
    for (int j = 0; j < JW; ++j)
      acc[r][j] = accumulate ? c[static_cast<std::size_t>(i0 + r) * n + j0 + j] : T(0);
  for (int t = 0; t < k; ++t) {
    const T* arow = a + static_cast<std::size_t>(t) * m + i0;
    const T* brow = b + static_cast<std::size_t>(t) * n + j0;
    for (int r = 0; r < MR; ++r) {
      const T av = arow[r];
      for (int j = 0; j < JW; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (int r = 0; r < MR; ++r)
    for (int j = 0; j < JW; ++j)
      c[static_cast<std::size_t>(i0 + r) * n + j0 + j] = acc[r][j];
}

template <typename T>
inline void gemm_at_panel_any(const T* a, const T* b, T* c, int k, int m, int n,
                              int i0, int mr, int j0, int jw, bool accumulate) {
  T acc[4][32];
  for (int r = 0; r < mr; ++r)
    for (int j = 0; j < jw; ++j)
      acc[r][j] = accumulate ? c[static_cast<std::size_t>(i0 + r) * n + j0 + j] : T(0);
  for (int t = 0; t < k; ++t) {
    const T* arow = a + static_cast<std::size_t>(t) * m + i0;
    const T* brow = b + static_cast<std::size_t>(t) * n + j0;
    for (int r = 0; r < mr; ++r) {
      const T av = arow[r];
      for (int j = 0; j < jw; ++j) acc[r][j] += av * brow[j];
    }
  }
  for (int r = 0; r < mr; ++r)
    for (int j = 0; j < jw; ++j)
      c[static_cast<std::size_t>(i0 + r) * n + j0 + j] = acc[r][j];
}

}  // namespace detail

/// C[m,n] = A[m,k] * B[k,n], or C += A*B when accumulate. Row-major.
template <typename T>
void gemm(const T* a, const T* b, T* c, int m, int k, int n, bool accumulate,
          bool parallel) {
#ifndef _OPENMP
  (void)parallel;
#endif
#pragma omp parallel for schedule(static) if (parallel && m > 4)
  for (int i0 = 0; i0 < m; i0 += 4) {
    if (m - i0 >= 4) {
      int j0 = 0;
      for (; j0 + 32 <= n; j0 += 32)
        detail::gemm_panel<T, 4, 32>(a, b, c, k, n, i0, j0, accumulate);
      for (; j0 + 16 <= n; j0 += 16)
        detail::gemm_panel<T, 4, 16>(a, b, c, k, n, i0, j0, accumulate);
      if (j0 < n) detail::gemm_panel_any(a, b, c, k, n, i0, 4, j0, n - j0, accumulate);
    } else {
      const int mr = m - i0;
      int j0 = 0;
      for (; j0 + 32 <= n; j0 += 32)
        detail::gemm_panel_any(a, b, c, k, n, i0, mr, j0, 32, accumulate);
      if (j0 < n) detail::gemm_panel_any(a, b, c, k, n, i0, mr, j0, n - j0, accumulate);
    }
  }
}

/// C[m,n] = A^T * B (or +=) where A is [k,m] and B is [k,n].
template <typename T>
void gemm_at(const T* a, const T* b, T* c, int k, int m, int n, bool accumulate,
             bool parallel) {
#ifndef _OPENMP
  (void)parallel;
#endif
#pragma omp parallel for schedule(static) if (parallel && m > 4)
  for (int i0 = 0; i0 < m; i0 += 4) {
    if (m - i0 >= 4) {
      int j0 = 0;
      for (; j0 + 32 <= n; j0 += 32)
        detail::gemm_at_panel<T, 4, 32>(a, b, c, k, m, n, i0, j0, accumulate);
      for (; j0 + 16 <= n; j0 += 16)
        detail::gemm_at_panel<T, 4, 16>(a, b, c, k, m, n, i0, j0, accumulate);
      if (j0 < n)
        detail::gemm_at_panel_any(a, b, c, k, m, n, i0, 4, j0, n - j0, accumulate);
    } else {
      const int mr = m - i0;
      int j0 = 0;
      for (; j0 + 32 <= n; j0 += 32)
        detail::gemm_at_panel_any(a, b, c, k, m, n, i0, mr, j0, 32, accumulate);
      if (j0 < n)
        detail::gemm_at_panel_any(a, b, c, k, m, n, i0, mr, j0, n - j0, accumulate);
    }
  }
}

/// out[cols, rows] = transpose of a[rows, cols].
template <typename T>
void transpose(const T* a, T* out, int rows, int cols) {
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      out[static_cast<std::size_t>(j) * rows + i] = a[static_cast<std::size_t>(i) * cols + j];
}

/// 3x3 valid-padding stride-1 patch matrix for one [h,w,c] image:
/// col[(i*wo + j)][(di*3 + dj)*c + ci] = x[i+di, j+dj, ci], with
/// wo = w-2, ho = h-2. Column layout matches weights flattened [3,3,c,o].
template <typename T>
void im2col3x3(const T* x, int h, int w, int c, T* col) {
  const int ho = h - 2, wo = w - 2;
  const std::size_t row_len = static_cast<std::size_t>(9) * c;
  for (int i = 0; i < ho; ++i) {
    for (int j = 0; j < wo; ++j) {
      T* dst = col + (static_cast<std::size_t>(i) * wo + j) * row_len;
      for (int di = 0; di < 3; ++di) {
        const T* src = x + (static_cast<std::size_t>(i + di) * w + j) * c;
        for (int q = 0; q < 3 * c; ++q) dst[q] = src[q];
        dst += 3 * c;
      }
    }
  }
}

/// Scatter-add inverse of im2col3x3: x[i+di, j+dj, ci] += col[row][q].
/// Serial per image; rows are visited in ascending order so the
/// accumulation order into x is fixed.
template <typename T>
void col2im3x3_add(const T* col, int h, int w, int c, T* x) {
  const int ho = h - 2, wo = w - 2;
  const std::size_t row_len = static_cast<std::size_t>(9) * c;
  for (int i = 0; i < ho; ++i) {
    for (int j = 0; j < wo; ++j) {
      const T* src = col + (static_cast<std::size_t>(i) * wo + j) * row_len;
      for (int di = 0; di < 3; ++di) {
        T* dst = x + (static_cast<std::size_t>(i + di) * w + j) * c;
        for (int q = 0; q < 3 * c; ++q) dst[q] += src[q];
        src += 3 * c;
      }
    }
  }
}

/// Per-thread scratch that grows on demand; conv drivers reuse it across
/// images to avoid reallocating multi-megabyte buffers per call.
template <typename T>
inline std::vector<T>& scratch(int slot) {
  thread_local std::vector<T> bufs[3];
  return bufs[slot];
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace scfn::kernels
