#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "scfn/tensor.hpp"

namespace scfn {

template <typename T>
struct LossReport {
  T mean_loss;
  std::vector<T> per_sample;
};

namespace detail {

template <typename T>
void check_bce_args(const Tensor<T>& logits, const Tensor<T>& labels) {
  if (logits.rank() != 2 || logits.extent(1) != 1)
    throw std::invalid_argument("bce: logits must be [N,1]");
  if (labels.rank() != 1 || labels.extent(0) != logits.extent(0))
    throw std::invalid_argument("bce: labels must be [N]");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] != T(0) && labels[i] != T(1))
      throw std::invalid_argument("bce: labels must be 0 or 1");
}

}  // namespace detail

/// Binary cross-entropy from logits, per sample
///   max(z,0) - z*y + log(1 + exp(-|z|)),
/// which equals -(y log p + (1-y) log(1-p)) with p = sigmoid(z) but stays
/// finite for any z. mean_loss is the batch mean.
template <typename T>
LossReport<T> bce_loss(const Tensor<T>& logits, const Tensor<T>& labels) {
  detail::check_bce_args(logits, labels);
  const std::size_t n = labels.size();
  LossReport<T> report;
  report.per_sample.resize(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const T z = logits[i];
    const T y = labels[i];
    const T l = std::max(z, T(0)) - z * y + std::log1p(std::exp(-std::abs(z)));
    report.per_sample[i] = l;
    acc += static_cast<double>(l);
  }
  report.mean_loss = static_cast<T>(acc / static_cast<double>(n));
  return report;
}

/// d(mean loss)/d(logit): (sigmoid(z) - y) / N.
template <typename T>
Tensor<T> bce_grad(const Tensor<T>& logits, const Tensor<T>& labels) {
  detail::check_bce_args(logits, labels);
  const std::size_t n = labels.size();
  Tensor<T> dlogit(logits.shape());
  const T inv_n = T(1) / static_cast<T>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const T z = logits[i];
    T s;
    if (z >= T(0)) {
      s = T(1) / (T(1) + std::exp(-z));
    } else {
      const T e = std::exp(z);
      s = e / (T(1) + e);
    }
    dlogit[i] = (s - labels[i]) * inv_n;
  }
  return dlogit;
}

}  // namespace scfn
