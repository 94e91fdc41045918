// Bicubic resampling and the reference image pyramid.
#pragma once

#include <vector>

#include "nnfield/image.hpp"

namespace nnf {

/// Separable bicubic interpolation (Catmull-Rom, a = -0.5) with
/// clamp-to-edge boundaries and pixel-center alignment. Exact on constant
/// and linear fields away from the borders.
Image bicubic_resize(const Image& img, int out_h, int out_w);

/// Builds [ref_0 .. ref_{n-1}] where ref_i has dimensions
/// round(h * k^i) x round(w * k^i) (round = half away from zero) and
/// ref_0 is the input itself. Throws if any level would fall below
/// min_dim pixels on either side, naming the offending level.
std::vector<Image> make_ref_pyramid(const Image& ref, double k, int n,
                                    int min_dim = 3);

} // namespace nnf
