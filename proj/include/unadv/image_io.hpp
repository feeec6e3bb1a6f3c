#ifndef UNADV_IMAGE_IO_HPP
#define UNADV_IMAGE_IO_HPP

#include <string>

#include "unadv/tensor.hpp"

namespace unadv::img {

// Binary PPM (P6, maxval 255). Accepts (H,W,3) or single-image (1,H,W,3)
// tensors; values are clamped to [0,1] and rounded to bytes.
void write_ppm(const std::string& path, const Tensor& image);

// Returns (H,W,3) with values in [0,1] (byte / 255).
Tensor read_ppm(const std::string& path);

// Byte-level quantization used by write_ppm, exposed so round-trip tests and
// patch archives can pre-quantize: v -> round(clamp01(v)*255)/255.
Tensor quantize8(const Tensor& image);

// Box-filter resampling with exact fractional pixel coverage; the mean is
// preserved, so integer-ratio downscales are plain block averages. Accepts
// (H,W,3) or (1,H,W,3) and returns (out_h,out_w,3).
Tensor resize_area(const Tensor& image, int out_h, int out_w);

} // namespace unadv::img

#endif
