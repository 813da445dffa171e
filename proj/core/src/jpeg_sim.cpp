#include "dd/jpeg_sim.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "dd/error.hpp"

namespace dd {
namespace {

// Annex K base tables.
constexpr int kLumaBase[64] = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};
constexpr int kChromaBase[64] = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

struct Dct8 {
  real_t basis[8][8];  // basis[k][n] = c(k) cos((2n+1)k pi / 16)
  Dct8() {
    for (int k = 0; k < 8; ++k) {
      const real_t ck = k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
      for (int n = 0; n < 8; ++n)
        basis[k][n] = ck * std::cos((2.0 * n + 1.0) * k * 3.14159265358979323846 / 16.0);
    }
  }
};
const Dct8 kDct;

// out = C * block * C^T (forward) / C^T * block * C (inverse)
void dct2_8x8(const real_t in[64], real_t out[64], bool inverse) {
  real_t tmp[64];
  for (int k = 0; k < 8; ++k)
    for (int n = 0; n < 8; ++n) {
      real_t acc = 0.0;
      for (int j = 0; j < 8; ++j)
        acc += (inverse ? kDct.basis[j][k] : kDct.basis[k][j]) * in[j * 8 + n];
      tmp[k * 8 + n] = acc;
    }
  for (int k = 0; k < 8; ++k)
    for (int n = 0; n < 8; ++n) {
      real_t acc = 0.0;
      for (int j = 0; j < 8; ++j)
        acc += tmp[k * 8 + j] * (inverse ? kDct.basis[j][n] : kDct.basis[n][j]);
      out[k * 8 + n] = acc;
    }
}

// Quantize / dequantize every 8x8 block of a plane (padded to block size).
void transform_plane(std::vector<real_t>& plane, int h, int w, const std::array<int, 64>& q) {
  const int bh = (h + 7) / 8, bw = (w + 7) / 8;
  const int ph = bh * 8, pw = bw * 8;
  std::vector<real_t> padded(static_cast<std::size_t>(ph) * pw);
  for (int y = 0; y < ph; ++y)
    for (int x = 0; x < pw; ++x)
      padded[static_cast<std::size_t>(y) * pw + x] =
          plane[static_cast<std::size_t>(std::min(y, h - 1)) * w + std::min(x, w - 1)];

  real_t block[64], coef[64];
  for (int by = 0; by < bh; ++by)
    for (int bx = 0; bx < bw; ++bx) {
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          block[y * 8 + x] = padded[static_cast<std::size_t>(by * 8 + y) * pw + bx * 8 + x] - 128.0;
      dct2_8x8(block, coef, false);
      for (int i = 0; i < 64; ++i)
        coef[i] = std::round(coef[i] / q[static_cast<std::size_t>(i)]) * q[static_cast<std::size_t>(i)];
      dct2_8x8(coef, block, true);
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x)
          padded[static_cast<std::size_t>(by * 8 + y) * pw + bx * 8 + x] = block[y * 8 + x] + 128.0;
    }
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      plane[static_cast<std::size_t>(y) * w + x] = padded[static_cast<std::size_t>(y) * pw + x];
}

}  // namespace

std::array<int, 64> jpeg_quant_table(int quality, bool chroma) {
  if (quality < 1 || quality > 100) throw ConfigError("jpeg quality must be in [1,100]");
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> q{};
  const int* base = chroma ? kChromaBase : kLumaBase;
  for (int i = 0; i < 64; ++i)
    q[static_cast<std::size_t>(i)] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
  return q;
}

Tensor jpeg_roundtrip(const Tensor& img, int quality) {
  if (img.rank() != 3 || img.dim(0) != 3) throw ConfigError("jpeg_roundtrip: expects (3,H,W)");
  const int h = img.dim(1), w = img.dim(2);
  const std::size_t plane = static_cast<std::size_t>(h) * w;

  // 8-bit quantization, then JFIF full-range YCbCr.
  std::vector<real_t> y(plane), cb(plane), cr(plane);
  for (std::size_t k = 0; k < plane; ++k) {
    auto q8 = [](real_t v) {
      v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
      return std::round(v * 255.0);
    };
    const real_t r = q8(img[k]);
    const real_t g = q8(img[plane + k]);
    const real_t b = q8(img[2 * plane + k]);
    y[k] = 0.299 * r + 0.587 * g + 0.114 * b;
    cb[k] = 128.0 - 0.168735892 * r - 0.331264108 * g + 0.5 * b;
    cr[k] = 128.0 + 0.5 * r - 0.418687589 * g - 0.081312411 * b;
  }

  // 4:2:0 chroma: 2x2 box average down, bilinear back up.
  const int h2 = (h + 1) / 2, w2 = (w + 1) / 2;
  auto downsample = [&](const std::vector<real_t>& src) {
    std::vector<real_t> out(static_cast<std::size_t>(h2) * w2);
    for (int yy = 0; yy < h2; ++yy)
      for (int xx = 0; xx < w2; ++xx) {
        const int y0 = 2 * yy, x0 = 2 * xx;
        const int y1 = std::min(y0 + 1, h - 1), x1 = std::min(x0 + 1, w - 1);
        out[static_cast<std::size_t>(yy) * w2 + xx] =
            0.25 * (src[static_cast<std::size_t>(y0) * w + x0] +
                    src[static_cast<std::size_t>(y0) * w + x1] +
                    src[static_cast<std::size_t>(y1) * w + x0] +
                    src[static_cast<std::size_t>(y1) * w + x1]);
      }
    return out;
  };
  auto upsample = [&](const std::vector<real_t>& src) {
    std::vector<real_t> out(plane);
    for (int yy = 0; yy < h; ++yy)
      for (int xx = 0; xx < w; ++xx) {
        real_t fy = (yy + 0.5) / 2.0 - 0.5;
        real_t fx = (xx + 0.5) / 2.0 - 0.5;
        fy = std::clamp<real_t>(fy, 0.0, h2 - 1.0);
        fx = std::clamp<real_t>(fx, 0.0, w2 - 1.0);
        const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
        const int y1 = std::min(y0 + 1, h2 - 1), x1 = std::min(x0 + 1, w2 - 1);
        const real_t wy = fy - y0, wx = fx - x0;
        out[static_cast<std::size_t>(yy) * w + xx] =
            (1 - wy) * ((1 - wx) * src[static_cast<std::size_t>(y0) * w2 + x0] +
                        wx * src[static_cast<std::size_t>(y0) * w2 + x1]) +
            wy * ((1 - wx) * src[static_cast<std::size_t>(y1) * w2 + x0] +
                  wx * src[static_cast<std::size_t>(y1) * w2 + x1]);
      }
    return out;
  };

  std::vector<real_t> cb2 = downsample(cb), cr2 = downsample(cr);

  const auto ql = jpeg_quant_table(quality, false);
  const auto qc = jpeg_quant_table(quality, true);
  transform_plane(y, h, w, ql);
  transform_plane(cb2, h2, w2, qc);
  transform_plane(cr2, h2, w2, qc);

  cb = upsample(cb2);
  cr = upsample(cr2);

  Tensor out({3, h, w});
  for (std::size_t k = 0; k < plane; ++k) {
    const real_t yy = y[k];
    const real_t pb = cb[k] - 128.0;
    const real_t pr = cr[k] - 128.0;
    auto to01 = [](real_t v) {
      v = std::round(v);
      v = v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v);
      return v / 255.0;
    };
    out[k] = to01(yy + 1.402 * pr);
    out[plane + k] = to01(yy - 0.344136286 * pb - 0.714136286 * pr);
    out[2 * plane + k] = to01(yy + 1.772 * pb);
  }
  return out;
}

}  // namespace dd
