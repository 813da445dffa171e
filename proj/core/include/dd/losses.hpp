#pragma once

#include "dd/autograd.hpp"
#include "dd/tensor.hpp"

namespace dd {

/// Weights of the composite objectives. The defaults are the trained
/// operating point; configs may override any of them.
struct LossWeights {
  real_t lambda_en = 0.8;
  real_t lambda_s = 0.1;
  real_t lambda_adv = 0.1;
  real_t alpha = 0.5;
  real_t beta = 2.0;

  void validate() const;  // ConfigError on negative weights
};

/// Clamp applied inside every log so losses stay finite.
inline constexpr real_t kLogEps = 1e-7;

/// SSIM convention used everywhere: 11x11 Gaussian window, sigma 1.5,
/// C1 = (0.01 D)^2, C2 = (0.03 D)^2 for dynamic range D. Inputs smaller than
/// the window fall back to global-statistics SSIM over each channel.
Tensor gaussian_window(int size, real_t sigma);
Var ssim_mean(const Var& a, const Var& b, real_t dynamic_range);

/// Mean binary cross entropy of sigmoid(logits) against bits in {0,1}.
Var bce_with_logits(const Tensor& bits, const Var& logits);

// ---- training objectives -----------------------------------------------------

/// E[-log D(x)] + E[-log(1 - D(x_w))] from discriminator scores in (0,1).
/// Scores are eps-clamped before the logs.
Var loss_discriminator_from_scores(const Var& scores_real, const Var& scores_watermarked);

/// Mean squared error over all pixels and channels.
Var loss_encoding_mse(const Var& x, const Var& x_w);

/// 1 - SSIM between two low-frequency subbands. The dynamic range is 2x the
/// image range because the orthonormal Haar LL of a [0,1] image lies in [0,2].
Var loss_structural(const Var& ll_original, const Var& ll_watermarked);

/// Convenience: Y channel -> one-level Haar -> LL -> loss_structural.
/// Inputs are image batches (N,3,H,W).
Var loss_structural_from_images(const Var& x, const Var& x_w);

/// Mean squared distance between the two pre-sigmoid decoder feature maps of
/// the watermarked image (own reconstruction vs swap).
Var loss_adversarial(const Var& tap_t, const Var& tap_s);

/// lambda_en * L_en + lambda_s * L_s + lambda_adv * L_adv
Var loss_image(const Var& l_en, const Var& l_s, const Var& l_adv, const LossWeights& w);

/// BCE(bits, sigmoid(logits_en)) + BCE(bits, sigmoid(logits_adv)).
Var loss_watermark(const Tensor& bits, const Var& logits_en, const Var& logits_adv);

/// alpha * L_img + beta * L_wm
Var loss_total(const Var& l_img, const Var& l_wm, real_t alpha, real_t beta);

/// Ablation objective: 1 - MSE(swap of watermarked, swap of clean carrier).
/// Minimizing it pushes the disrupted swap away from the clean swap.
Var loss_untargeted_ablation(const Var& swap_watermarked, const Var& swap_clean);

/// Ablation objective: MSE(swap of watermarked, reconstruction of clean
/// carrier); image-domain targeted variant.
Var loss_targeted_original_ablation(const Var& swap_watermarked, const Var& recon_clean);

}  // namespace dd
