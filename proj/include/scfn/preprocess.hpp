#pragma once

#include "scfn/rng.hpp"
#include "scfn/tensor.hpp"

namespace scfn {

/// Per-image standardization: (x - mean) / max(std, 1e-7), population std,
/// statistics accumulated in double.
Tensor<float> standardize(const Tensor<float>& img);

struct AugmentConfig {
  double hflip_prob = 0.5;
  double max_rotate_deg = 5.0;
  double max_shift_frac = 0.05;  // of each dimension
  double zoom_min = 0.95;
  double zoom_max = 1.05;
};

/// Random horizontal flip, rotation, shift and zoom composed into a single
/// inverse affine map, sampled bilinearly with nearest-edge fill. Always
/// consumes exactly five uniform draws from rng regardless of configuration.
/// With flip probability 0 and zero-width parameter ranges the output is
/// bitwise identical to the input.
Tensor<float> augment(const Tensor<float>& img, const AugmentConfig& cfg, RngStream& rng);

}  // namespace scfn
