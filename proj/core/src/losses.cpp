#include "dd/losses.hpp"

#include <cmath>

#include "dd/error.hpp"

namespace dd {
namespace {

Var mse(const Var& a, const Var& b) { return mean_all(square(sub(a, b))); }

Var clamped_log(const Var& p) { return vlog(clamp(p, kLogEps, 1.0 - kLogEps)); }

// Per-channel global-statistics SSIM for inputs smaller than the window.
Var ssim_global(const Var& a, const Var& b, real_t c1, real_t c2) {
  Var mu_a = global_avg_pool(a);  // (N,C)
  Var mu_b = global_avg_pool(b);
  Var var_a = sub(global_avg_pool(square(a)), square(mu_a));
  Var var_b = sub(global_avg_pool(square(b)), square(mu_b));
  Var cov = sub(global_avg_pool(mul(a, b)), mul(mu_a, mu_b));
  Var num = mul(add_scalar(mul_scalar(mul(mu_a, mu_b), 2.0), c1),
                add_scalar(mul_scalar(cov, 2.0), c2));
  Var den = mul(add_scalar(add(square(mu_a), square(mu_b)), c1),
                add_scalar(add(var_a, var_b), c2));
  return mean_all(divide(num, den));
}

}  // namespace

void LossWeights::validate() const {
  if (lambda_en < 0 || lambda_s < 0 || lambda_adv < 0 || alpha < 0 || beta < 0)
    throw ConfigError("loss weights must be nonnegative");
}

Tensor gaussian_window(int size, real_t sigma) {
  Tensor k({size, size});
  const real_t c = (size - 1) / 2.0;
  real_t total = 0.0;
  for (int y = 0; y < size; ++y)
    for (int x = 0; x < size; ++x) {
      real_t d2 = (y - c) * (y - c) + (x - c) * (x - c);
      real_t v = std::exp(-d2 / (2.0 * sigma * sigma));
      k.at2(y, x) = v;
      total += v;
    }
  for (std::size_t i = 0; i < k.numel(); ++i) k[i] /= total;
  return k;
}

Var ssim_mean(const Var& a, const Var& b, real_t dynamic_range) {
  if (!a->value.same_shape(b->value)) throw ConfigError("ssim_mean: shape mismatch");
  if (a->value.rank() != 4) throw ConfigError("ssim_mean: expects (N,C,H,W)");
  const real_t c1 = (0.01 * dynamic_range) * (0.01 * dynamic_range);
  const real_t c2 = (0.03 * dynamic_range) * (0.03 * dynamic_range);
  const int window = 11;
  if (a->value.dim(2) < window || a->value.dim(3) < window) return ssim_global(a, b, c1, c2);

  static const Tensor kWindow = gaussian_window(window, 1.5);
  auto blur = [](const Var& x) { return window_correlate(x, kWindow); };

  Var mu_a = blur(a);
  Var mu_b = blur(b);
  Var mu_aa = square(mu_a);
  Var mu_bb = square(mu_b);
  Var mu_ab = mul(mu_a, mu_b);
  Var sigma_aa = sub(blur(square(a)), mu_aa);
  Var sigma_bb = sub(blur(square(b)), mu_bb);
  Var sigma_ab = sub(blur(mul(a, b)), mu_ab);

  Var num = mul(add_scalar(mul_scalar(mu_ab, 2.0), c1), add_scalar(mul_scalar(sigma_ab, 2.0), c2));
  Var den = mul(add_scalar(add(mu_aa, mu_bb), c1), add_scalar(add(sigma_aa, sigma_bb), c2));
  return mean_all(divide(num, den));
}

Var bce_with_logits(const Tensor& bits, const Var& logits) {
  if (!logits->value.same_shape(bits))
    throw ConfigError("bce_with_logits: bits/logits length mismatch");
  Var p = clamp(sigmoid(logits), kLogEps, 1.0 - kLogEps);
  // -(w log p + (1-w) log(1-p)), mean over every bit.
  Tensor w = bits;
  Tensor w_neg = bits;
  for (std::size_t i = 0; i < w_neg.numel(); ++i) w_neg[i] = 1.0 - w_neg[i];
  Var term_pos = mul(constant(w), vlog(p));
  Var term_neg = mul(constant(w_neg), vlog(scalar_minus(1.0, p)));
  return mul_scalar(mean_all(add(term_pos, term_neg)), -1.0);
}

Var loss_discriminator_from_scores(const Var& scores_real, const Var& scores_watermarked) {
  if (scores_real->value.numel() == 0 || scores_watermarked->value.numel() == 0)
    throw ConfigError("loss_discriminator: empty batch");
  Var term_real = mul_scalar(mean_all(clamped_log(scores_real)), -1.0);
  Var term_fake = mul_scalar(mean_all(clamped_log(scalar_minus(1.0, scores_watermarked))), -1.0);
  return add(term_real, term_fake);
}

Var loss_encoding_mse(const Var& x, const Var& x_w) {
  if (!x->value.same_shape(x_w->value)) throw ConfigError("loss_encoding_mse: shape mismatch");
  return mse(x, x_w);
}

Var loss_structural(const Var& ll_original, const Var& ll_watermarked) {
  if (!ll_original->value.same_shape(ll_watermarked->value))
    throw ConfigError("loss_structural: shape mismatch");
  // Orthonormal Haar LL of a [0,1] image spans [0,2].
  return scalar_minus(1.0, ssim_mean(ll_original, ll_watermarked, 2.0));
}

namespace {

// LL band of the Y channel: (N,3,H,W) -> (N,1,H/2,W/2).
Var ll_of_y(const Var& images) {
  Var bands = haar2(rgb_to_y(images));  // band order LL,LH,HL,HH
  return slice_channels(bands, 0, 1);
}

}  // namespace

Var loss_structural_from_images(const Var& x, const Var& x_w) {
  return loss_structural(ll_of_y(x), ll_of_y(x_w));
}

Var loss_adversarial(const Var& tap_t, const Var& tap_s) {
  if (!tap_t->value.same_shape(tap_s->value)) throw ConfigError("loss_adversarial: shape mismatch");
  return mse(tap_t, tap_s);
}

Var loss_image(const Var& l_en, const Var& l_s, const Var& l_adv, const LossWeights& w) {
  w.validate();
  return add(add(mul_scalar(l_en, w.lambda_en), mul_scalar(l_s, w.lambda_s)),
             mul_scalar(l_adv, w.lambda_adv));
}

Var loss_watermark(const Tensor& bits, const Var& logits_en, const Var& logits_adv) {
  return add(bce_with_logits(bits, logits_en), bce_with_logits(bits, logits_adv));
}

Var loss_total(const Var& l_img, const Var& l_wm, real_t alpha, real_t beta) {
  if (alpha < 0 || beta < 0) throw ConfigError("loss_total: weights must be nonnegative");
  return add(mul_scalar(l_img, alpha), mul_scalar(l_wm, beta));
}

Var loss_untargeted_ablation(const Var& swap_watermarked, const Var& swap_clean) {
  if (!swap_watermarked->value.same_shape(swap_clean->value))
    throw ConfigError("loss_untargeted_ablation: shape mismatch");
  return scalar_minus(1.0, mse(swap_watermarked, swap_clean));
}

Var loss_targeted_original_ablation(const Var& swap_watermarked, const Var& recon_clean) {
  if (!swap_watermarked->value.same_shape(recon_clean->value))
    throw ConfigError("loss_targeted_original_ablation: shape mismatch");
  return mse(swap_watermarked, recon_clean);
}

}  // namespace dd
