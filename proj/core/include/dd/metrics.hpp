#pragma once

#include <vector>

#include "dd/dataset.hpp"
#include "dd/tensor.hpp"

namespace dd {

real_t mse(const Tensor& a, const Tensor& b);

/// 10 log10(1 / MSE) for [0,1] data, capped at 100 dB when MSE < 1e-10.
real_t psnr(const Tensor& a, const Tensor& b);

/// SSIM with the shared convention (11x11 Gaussian window, sigma 1.5,
/// C1=(0.01)^2, C2=(0.03)^2 for unit range); channels scored independently
/// and averaged. Inputs smaller than the window use global statistics.
real_t ssim(const Tensor& a, const Tensor& b);

/// Mean absolute error.
real_t l1(const Tensor& a, const Tensor& b);

/// Fraction of matching bits.
real_t bit_accuracy(const WatermarkMessage& truth, const WatermarkMessage& decoded);

/// Fraction of pairs whose mean squared difference exceeds tau.
real_t sr_mask(const std::vector<Tensor>& disrupted, const std::vector<Tensor>& clean,
               real_t tau);

}  // namespace dd
