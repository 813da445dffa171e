#pragma once

// Orthonormal one-level 2D Haar block transforms, shared by the plain API
// and the autograd ops. Not installed.

#include "dd/tensor.hpp"

namespace dd::detail {

inline void haar_block(real_t a, real_t b, real_t c, real_t d, real_t& ll, real_t& lh, real_t& hl,
                       real_t& hh) {
  ll = 0.5 * (a + b + c + d);
  lh = 0.5 * (a - b + c - d);
  hl = 0.5 * (a + b - c - d);
  hh = 0.5 * (a - b - c + d);
}

inline void ihaar_block(real_t ll, real_t lh, real_t hl, real_t hh, real_t& a, real_t& b,
                        real_t& c, real_t& d) {
  a = 0.5 * (ll + lh + hl + hh);
  b = 0.5 * (ll - lh + hl - hh);
  c = 0.5 * (ll + lh - hl - hh);
  d = 0.5 * (ll - lh - hl + hh);
}

inline void haar_forward_plane(const real_t* src, int h, int w, real_t* ll, real_t* lh,
                               real_t* hl, real_t* hh) {
  const int h2 = h / 2, w2 = w / 2;
  for (int y = 0; y < h2; ++y)
    for (int x = 0; x < w2; ++x) {
      const real_t* p = src + (2 * y) * w + 2 * x;
      haar_block(p[0], p[1], p[w], p[w + 1], ll[y * w2 + x], lh[y * w2 + x], hl[y * w2 + x],
                 hh[y * w2 + x]);
    }
}

inline void haar_inverse_plane(const real_t* ll, const real_t* lh, const real_t* hl,
                               const real_t* hh, int h2, int w2, real_t* dst) {
  const int w = 2 * w2;
  for (int y = 0; y < h2; ++y)
    for (int x = 0; x < w2; ++x) {
      real_t* p = dst + (2 * y) * w + 2 * x;
      ihaar_block(ll[y * w2 + x], lh[y * w2 + x], hl[y * w2 + x], hh[y * w2 + x], p[0], p[1],
                  p[w], p[w + 1]);
    }
}

}  // namespace dd::detail
