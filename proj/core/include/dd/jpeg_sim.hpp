#pragma once

#include <array>

#include "dd/tensor.hpp"

namespace dd {

/// Baseline-JPEG lossy path: 8-bit quantization, JFIF YCbCr conversion,
/// 4:2:0 chroma subsampling, 8x8 DCT with quality-scaled quantization
/// tables, inverse path back to RGB in [0,1]. Entropy coding is lossless and
/// therefore omitted; the output equals a real encode/decode round trip of
/// the same pipeline. Pure arithmetic, bit-reproducible.
Tensor jpeg_roundtrip(const Tensor& img, int quality);

/// Quality-scaled quantization table (standard luma/chroma base tables,
/// libjpeg-style scaling). Exposed for tests.
std::array<int, 64> jpeg_quant_table(int quality, bool chroma);

}  // namespace dd
