#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "scfn/tensor.hpp"

namespace scfn {

/// Adam optimizer state: per-parameter first/second moment accumulators
/// plus the step counter. Moment tensors are created on the first step and
/// mirror the parameter shapes from then on.
template <typename T>
struct AdamState {
  T alpha = static_cast<T>(0.001);
  T beta1 = static_cast<T>(0.9);
  T beta2 = static_cast<T>(0.999);
  T epsilon = static_cast<T>(1e-8);

  std::uint64_t t = 0;
  std::vector<Tensor<T>> m, v;

  // Running beta^t products; cheaper and smoother than pow() per step.
  T beta1_pow = T(1);
  T beta2_pow = T(1);
};

/// One Adam update over a fixed-order parameter list:
///   t <- t+1; m <- b1*m + (1-b1)*g; v <- b2*v + (1-b2)*g^2;
///   theta <- theta - alpha * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps).
/// Parameters and moments are updated in place.
template <typename T>
void adam_step(AdamState<T>& state, const std::vector<Tensor<T>*>& params,
               const std::vector<Tensor<T>>& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("adam_step: parameter/gradient count mismatch");
  if (state.t == std::numeric_limits<std::uint64_t>::max())
    throw std::runtime_error("adam_step: step counter overflow");

  if (state.m.empty()) {
    state.m.reserve(params.size());
    state.v.reserve(params.size());
    for (const Tensor<T>* p : params) {
      state.m.emplace_back(p->shape());
      state.v.emplace_back(p->shape());
    }
  }
  if (state.m.size() != params.size())
    throw std::invalid_argument("adam_step: state does not match parameter list");

  state.t += 1;
  state.beta1_pow *= state.beta1;
  state.beta2_pow *= state.beta2;
  const T c1 = T(1) / (T(1) - state.beta1_pow);
  const T c2 = T(1) / (T(1) - state.beta2_pow);

  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor<T>& theta = *params[p];
    const Tensor<T>& g = grads[p];
    if (!theta.same_shape(g) || !state.m[p].same_shape(g))
      throw std::invalid_argument("adam_step: gradient shape mismatch");
    T* m = state.m[p].data();
    T* v = state.v[p].data();
    T* w = theta.data();
    const T* gd = g.data();
    const std::size_t n = theta.size();
    for (std::size_t i = 0; i < n; ++i) {
      m[i] = state.beta1 * m[i] + (T(1) - state.beta1) * gd[i];
      v[i] = state.beta2 * v[i] + (T(1) - state.beta2) * gd[i] * gd[i];
      const T m_hat = m[i] * c1;
      const T v_hat = v[i] * c2;
      w[i] -= state.alpha * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace scfn
