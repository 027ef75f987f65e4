#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "scfn/kernels.hpp"

namespace scfn {

/// Dense row-major array of rank 1..4.
///
/// float is the normal working precision; the double instantiation is the
/// 64-bit "check mode" used for finite-difference verification. Values are
/// plain data: copying a Tensor copies its buffer.
template <typename T>
class Tensor {
public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) : shape_(std::move(shape)) {
    data_.assign(checked_size(shape_), T(0));
  }

  Tensor(std::vector<int> shape, T fill) : shape_(std::move(shape)) {
    data_.assign(checked_size(shape_), fill);
  }

  Tensor(std::vector<int> shape, std::vector<T> data)
      : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_size(shape_) != data_.size())
      throw std::invalid_argument("Tensor: data length does not match shape");
  }

  int rank() const { return static_cast<int>(shape_.size()); }
  const std::vector<int>& shape() const { return shape_; }
  int extent(int axis) const { return shape_.at(static_cast<std::size_t>(axis)); }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  /// Element access by coordinates; rank must match the argument count.
  template <typename... Ix>
  T& operator()(Ix... ix) {
    return data_[flat(ix...)];
  }
  template <typename... Ix>
  const T& operator()(Ix... ix) const {
    return data_[flat(ix...)];
  }

  /// Row-major flat index: for shape [a,b,c,d] and coords (i,j,k,l),
  /// ((i*b + j)*c + k)*d + l.
  template <typename... Ix>
  std::size_t flat(Ix... ix) const {
    constexpr int n = sizeof...(Ix);
    if (n != rank()) throw std::invalid_argument("Tensor: index rank mismatch");
    const long coords[n] = {static_cast<long>(ix)...};
    std::size_t idx = 0;
    for (int a = 0; a < n; ++a) {
      if (coords[a] < 0 || coords[a] >= shape_[static_cast<std::size_t>(a)])
        throw std::out_of_range("Tensor: index out of range");
      idx = idx * static_cast<std::size_t>(shape_[static_cast<std::size_t>(a)]) +
            static_cast<std::size_t>(coords[a]);
    }
    return idx;
  }

  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  bool all_finite() const {
    for (const T& v : data_)
      if (!std::isfinite(static_cast<double>(v))) return false;
    return true;
  }

  /// Lossy precision conversion (f32 <-> f64 for check mode).
  template <typename U>
  Tensor<U> cast() const {
    std::vector<U> out(data_.size());
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return Tensor<U>(shape_, std::move(out));
  }

private:
  static std::size_t checked_size(const std::vector<int>& shape) {
    if (shape.empty() || shape.size() > 4)
      throw std::invalid_argument("Tensor: rank must be between 1 and 4");
    std::size_t n = 1;
    for (int e : shape) {
      if (e < 1) throw std::invalid_argument("Tensor: extents must be positive");
      n *= static_cast<std::size_t>(e);
    }
    return n;
  }

  std::vector<int> shape_;
  std::vector<T> data_;
};

/// Tensor with every element equal to value.
template <typename T>
Tensor<T> tensor_filled(std::vector<int> shape, T value) {
  return Tensor<T>(std::move(shape), value);
}

/// c[i,j] = sum_t a[i,t]*b[t,j]; accumulation over t in ascending order.
template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  if (a.rank() != 2 || b.rank() != 2)
    throw std::invalid_argument("matmul: operands must be rank 2");
  if (a.extent(1) != b.extent(0))
    throw std::invalid_argument("matmul: inner extents differ (" +
                                std::to_string(a.extent(1)) + " vs " +
                                std::to_string(b.extent(0)) + ")");
  const int m = a.extent(0), k = a.extent(1), n = b.extent(1);
  Tensor<T> c({m, n});
  kernels::gemm(a.data(), b.data(), c.data(), m, k, n, false, true);
  return c;
}

/// Arithmetic mean over the given axes; remaining extents keep their order.
/// An empty axis set returns the input unchanged. Sums are accumulated in
/// double, in row-major element order.
template <typename T>
Tensor<T> reduce_mean(const Tensor<T>& x, const std::vector<int>& axes) {
  const int r = x.rank();
  bool drop[4] = {false, false, false, false};
  for (int a : axes) {
    if (a < 0 || a >= r) throw std::invalid_argument("reduce_mean: axis out of range");
    if (drop[a]) throw std::invalid_argument("reduce_mean: duplicate axis");
    drop[a] = true;
  }
  if (axes.empty()) return x;

  std::vector<int> out_shape;
  for (int a = 0; a < r; ++a)
    if (!drop[a]) out_shape.push_back(x.shape()[static_cast<std::size_t>(a)]);
  const bool full = out_shape.empty();
  if (full) out_shape.push_back(1);

  std::vector<double> acc(full ? 1 : 0, 0.0);
  if (!full) {
    std::size_t n = 1;
    for (int e : out_shape) n *= static_cast<std::size_t>(e);
    acc.assign(n, 0.0);
  }

  // Walk the input in row-major order, projecting coordinates onto the
  // kept axes. Fixed traversal order keeps the reduction deterministic.
  const std::vector<int>& shape = x.shape();
  std::size_t reduce_count = 1;
  for (int a = 0; a < r; ++a)
    if (drop[a]) reduce_count *= static_cast<std::size_t>(shape[static_cast<std::size_t>(a)]);

  int coord[4] = {0, 0, 0, 0};
  const std::size_t total = x.size();
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t out_idx = 0;
    for (int a = 0; a < r; ++a)
      if (!drop[a])
        out_idx = out_idx * static_cast<std::size_t>(shape[static_cast<std::size_t>(a)]) +
                  static_cast<std::size_t>(coord[a]);
    acc[full ? 0 : out_idx] += static_cast<double>(x[i]);
    for (int a = r - 1; a >= 0; --a) {
      if (++coord[a] < shape[static_cast<std::size_t>(a)]) break;
      coord[a] = 0;
    }
  }

  Tensor<T> out(out_shape);
  const double inv = 1.0 / static_cast<double>(reduce_count);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<T>(acc[i] * inv);
  return out;
}

}  // namespace scfn
