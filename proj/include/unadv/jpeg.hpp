#ifndef UNADV_JPEG_HPP
#define UNADV_JPEG_HPP

#include <cstdint>
#include <vector>

#include "unadv/tensor.hpp"

namespace unadv::jpeg {

// Baseline sequential JPEG, 8-bit, 4:4:4 (no chroma subsampling), standard
// quantization tables scaled by the usual libjpeg quality curve and the
// standard Huffman tables. Input (H,W,3) or (1,H,W,3) in [0,1]; quality in
// [1,100]. The stream is a plain JFIF-style file: SOI, DQT, SOF0, DHT, SOS,
// entropy data, EOI.
std::vector<uint8_t> encode(const Tensor& image, int quality);

// Decodes streams produced by encode (and any other baseline 4:4:4 3-channel
// stream without restart markers). Returns (H,W,3) in [0,1].
Tensor decode(const std::vector<uint8_t>& bytes);

// 8x8 type-II DCT pair with JPEG normalization, in place on a row-major
// block; idct8x8(fdct8x8(b)) == b up to rounding. Exposed for tests.
void fdct8x8(real block[64]);
void idct8x8(real block[64]);

} // namespace unadv::jpeg

#endif
