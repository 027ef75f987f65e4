#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scfn/tensor.hpp"

namespace scfn {

/// Decodes a binary PGM (P5, maxval <= 255) into [h,w,1] with values in
/// [0,1]. Throws std::runtime_error on any other format or on truncation.
Tensor<float> read_pgm(const std::string& path);

/// Writes 8-bit binary PGM. pixels is row-major, h*w bytes.
void write_pgm(const std::string& path, const std::vector<uint8_t>& pixels, size_t h,
               size_t w);

/// Bilinear resample of an [h,w,1] image to [out_h,out_w,1]. Identity when
/// the sizes already match.
Tensor<float> resize_bilinear(const Tensor<float>& img, int out_h, int out_w);

/// read_pgm + resize to the network's input size.
Tensor<float> load_image(const std::string& path, int out_h = 128, int out_w = 128);

}  // namespace scfn
