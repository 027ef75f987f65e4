#pragma once

#include <cstdint>
#include <string>

#include "scfn/rng.hpp"
#include "scfn/tensor.hpp"

namespace scfn {

/// Procedural 128x128 textures in [0,1] used as stand-in data for the two
/// cell lines. Category A: a few large soft discs on a noisy background.
/// Category B: many thin oriented ribbons. Both get a randomized base
/// brightness so the classifier cannot key on overall intensity.
Tensor<float> render_blob_image(RngStream stream);
Tensor<float> render_streak_image(RngStream stream);

/// Writes n_per_category PGM files per category under out_dir/class-a and
/// out_dir/class-b plus a manifest of "<relative-path>,<category>" lines.
/// Deterministic given the seed. Returns the manifest path.
std::string generate_synthetic(size_t n_per_category, uint64_t seed,
                               const std::string& out_dir);

}  // namespace scfn
