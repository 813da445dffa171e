#include "dd/metrics.hpp"

#include <cmath>

#include "dd/error.hpp"
#include "dd/losses.hpp"

namespace dd {
namespace {

void check_pair(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b)) throw ConfigError(std::string(op) + ": shape mismatch");
  if (a.numel() == 0) throw ConfigError(std::string(op) + ": empty input");
}

// SSIM of one channel plane (h x w) with unit dynamic range.
real_t ssim_plane(const real_t* a, const real_t* b, int h, int w) {
  constexpr real_t c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  constexpr int window = 11;
  if (h < window || w < window) {
    real_t mu_a = 0, mu_b = 0;
    const std::size_t n = static_cast<std::size_t>(h) * w;
    for (std::size_t i = 0; i < n; ++i) {
      mu_a += a[i];
      mu_b += b[i];
    }
    mu_a /= static_cast<real_t>(n);
    mu_b /= static_cast<real_t>(n);
    real_t va = 0, vb = 0, cov = 0;
    for (std::size_t i = 0; i < n; ++i) {
      va += (a[i] - mu_a) * (a[i] - mu_a);
      vb += (b[i] - mu_b) * (b[i] - mu_b);
      cov += (a[i] - mu_a) * (b[i] - mu_b);
    }
    va /= static_cast<real_t>(n);
    vb /= static_cast<real_t>(n);
    cov /= static_cast<real_t>(n);
    return ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
           ((mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2));
  }
  static const Tensor kWindow = gaussian_window(window, 1.5);
  const int ho = h - window + 1, wo = w - window + 1;
  real_t acc = 0.0;
  for (int oy = 0; oy < ho; ++oy)
    for (int ox = 0; ox < wo; ++ox) {
      real_t mu_a = 0, mu_b = 0, saa = 0, sbb = 0, sab = 0;
      for (int ky = 0; ky < window; ++ky)
        for (int kx = 0; kx < window; ++kx) {
          const real_t wgt = kWindow.at2(ky, kx);
          const real_t av = a[(oy + ky) * w + ox + kx];
          const real_t bv = b[(oy + ky) * w + ox + kx];
          mu_a += wgt * av;
          mu_b += wgt * bv;
          saa += wgt * av * av;
          sbb += wgt * bv * bv;
          sab += wgt * av * bv;
        }
      const real_t va = saa - mu_a * mu_a;
      const real_t vb = sbb - mu_b * mu_b;
      const real_t cov = sab - mu_a * mu_b;
      acc += ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) /
             ((mu_a * mu_a + mu_b * mu_b + c1) * (va + vb + c2));
    }
  return acc / (static_cast<real_t>(ho) * wo);
}

}  // namespace

real_t mse(const Tensor& a, const Tensor& b) {
  check_pair(a, b, "mse");
  real_t acc = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const real_t d = a[i] - b[i];
    acc += d * d;
  }
  return acc / static_cast<real_t>(a.numel());
}

real_t psnr(const Tensor& a, const Tensor& b) {
  const real_t m = mse(a, b);
  if (m < 1e-10) return 100.0;
  return 10.0 * std::log10(1.0 / m);
}

real_t ssim(const Tensor& a, const Tensor& b) {
  check_pair(a, b, "ssim");
  if (a.rank() == 2) return ssim_plane(a.data(), b.data(), a.dim(0), a.dim(1));
  if (a.rank() != 3) throw ConfigError("ssim: expects (C,H,W) or (H,W)");
  const int c = a.dim(0), h = a.dim(1), w = a.dim(2);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  real_t acc = 0.0;
  for (int ch = 0; ch < c; ++ch)
    acc += ssim_plane(a.data() + static_cast<std::size_t>(ch) * plane,
                      b.data() + static_cast<std::size_t>(ch) * plane, h, w);
  return acc / c;
}

real_t l1(const Tensor& a, const Tensor& b) {
  check_pair(a, b, "l1");
  real_t acc = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) acc += std::fabs(a[i] - b[i]);
  return acc / static_cast<real_t>(a.numel());
}

real_t bit_accuracy(const WatermarkMessage& truth, const WatermarkMessage& decoded) {
  if (truth.length() != decoded.length())
    throw ConfigError("bit_accuracy: length mismatch (" + std::to_string(truth.length()) +
                      " vs " + std::to_string(decoded.length()) + ")");
  int hits = 0;
  for (int i = 0; i < truth.length(); ++i)
    if (truth.bits[static_cast<std::size_t>(i)] == decoded.bits[static_cast<std::size_t>(i)])
      ++hits;
  return static_cast<real_t>(hits) / truth.length();
}

real_t sr_mask(const std::vector<Tensor>& disrupted, const std::vector<Tensor>& clean,
               real_t tau) {
  if (disrupted.empty() || disrupted.size() != clean.size())
    throw ConfigError("sr_mask: needs nonempty paired sets");
  int hits = 0;
  for (std::size_t i = 0; i < disrupted.size(); ++i)
    if (mse(disrupted[i], clean[i]) > tau) ++hits;
  return static_cast<real_t>(hits) / static_cast<real_t>(disrupted.size());
}

}  // namespace dd
