#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dd/tensor.hpp"

namespace dd {

// Images are rank-3 tensors (3,H,W), RGB, values in [0,1].
// Batches stack to (N,3,H,W).

/// Decode a PNG/JPEG file. Returns nullopt when the file cannot be decoded
/// (caller decides whether that is fatal). Pixel values are clamped to [0,1].
std::optional<Tensor> try_load_image_file(const std::string& path);

/// Decode or throw RuntimeFailure.
Tensor load_image_file(const std::string& path);

/// Write an image as PNG, rounding to 8-bit.
void save_png(const std::string& path, const Tensor& img);

/// Bilinear resampling with half-pixel centers (corner-aligned off).
Tensor resize_bilinear(const Tensor& img, int out_h, int out_w);

void clamp01_inplace(Tensor& t);

Tensor stack_batch(const std::vector<Tensor>& images);
Tensor stack_batch(const std::vector<const Tensor*>& images);
/// Copy image i out of an (N,3,H,W) batch.
Tensor batch_slice(const Tensor& batch, int index);

}  // namespace dd
