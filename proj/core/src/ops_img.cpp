#include "dd/autograd.hpp"
#include "dd/error.hpp"
#include "haar_kernels.hpp"
#include "op_helpers.hpp"

namespace dd {
using detail::haar_forward_plane;
using detail::haar_inverse_plane;
using detail::unary;
namespace {

// BT.601 full-range luma weights.
constexpr real_t kYr = 0.299, kYg = 0.587, kYb = 0.114;

}  // namespace

Var rgb_to_y(const Var& x) {
  const Tensor& t = x->value;
  if (t.rank() != 4 || t.dim(1) != 3) throw ConfigError("rgb_to_y: expects (N,3,H,W)");
  const int n = t.dim(0), h = t.dim(2), w = t.dim(3);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Tensor out({n, 1, h, w});
  for (int i = 0; i < n; ++i) {
    const real_t* r = t.data() + static_cast<std::size_t>(i) * 3 * plane;
    const real_t* g = r + plane;
    const real_t* b = g + plane;
    real_t* y = out.data() + static_cast<std::size_t>(i) * plane;
    for (std::size_t k = 0; k < plane; ++k) y[k] = kYr * r[k] + kYg * g[k] + kYb * b[k];
  }
  return unary(x, std::move(out), [n, plane](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (int i = 0; i < n; ++i) {
      const real_t* gy = self.grad.data() + static_cast<std::size_t>(i) * plane;
      real_t* gr = g.data() + static_cast<std::size_t>(i) * 3 * plane;
      real_t* gg = gr + plane;
      real_t* gb = gg + plane;
      for (std::size_t k = 0; k < plane; ++k) {
        gr[k] += kYr * gy[k];
        gg[k] += kYg * gy[k];
        gb[k] += kYb * gy[k];
      }
    }
  });
}

Var haar2(const Var& x) {
  const Tensor& t = x->value;
  if (t.rank() != 4) throw ConfigError("haar2: expects rank-4");
  const int n = t.dim(0), c = t.dim(1), h = t.dim(2), w = t.dim(3);
  if (h % 2 != 0 || w % 2 != 0) throw ConfigError("haar2: H and W must be even");
  const int h2 = h / 2, w2 = w / 2;
  const std::size_t band = static_cast<std::size_t>(h2) * w2;
  Tensor out({n, 4 * c, h2, w2});
  for (int i = 0; i < n * c; ++i) {
    const real_t* src = t.data() + static_cast<std::size_t>(i) * h * w;
    const int ni = i / c, ci = i % c;
    real_t* base = out.data() + (static_cast<std::size_t>(ni) * 4 * c + 4 * ci) * band;
    haar_forward_plane(src, h, w, base, base + band, base + 2 * band, base + 3 * band);
  }
  return unary(x, std::move(out), [n, c, h, w, h2, w2, band](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    // The transform is orthonormal, so the adjoint is the inverse.
    Tensor tmp({h, w});
    for (int i = 0; i < n * c; ++i) {
      const int ni = i / c, ci = i % c;
      const real_t* base = self.grad.data() + (static_cast<std::size_t>(ni) * 4 * c + 4 * ci) * band;
      haar_inverse_plane(base, base + band, base + 2 * band, base + 3 * band, h2, w2, tmp.data());
      real_t* dst = g.data() + static_cast<std::size_t>(i) * h * w;
      for (std::size_t k = 0; k < static_cast<std::size_t>(h) * w; ++k) dst[k] += tmp[k];
    }
  });
}

Var ihaar2(const Var& x) {
  const Tensor& t = x->value;
  if (t.rank() != 4) throw ConfigError("ihaar2: expects rank-4");
  if (t.dim(1) % 4 != 0) throw ConfigError("ihaar2: channel count must be a multiple of 4");
  const int n = t.dim(0), c = t.dim(1) / 4, h2 = t.dim(2), w2 = t.dim(3);
  const std::size_t band = static_cast<std::size_t>(h2) * w2;
  const int h = 2 * h2, w = 2 * w2;
  Tensor out({n, c, h, w});
  for (int i = 0; i < n * c; ++i) {
    const int ni = i / c, ci = i % c;
    const real_t* base = t.data() + (static_cast<std::size_t>(ni) * 4 * c + 4 * ci) * band;
    haar_inverse_plane(base, base + band, base + 2 * band, base + 3 * band, h2, w2,
                       out.data() + static_cast<std::size_t>(i) * h * w);
  }
  return unary(x, std::move(out), [n, c, h, w, h2, w2, band](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    Tensor ll({h2, w2}), lh({h2, w2}), hl({h2, w2}), hh({h2, w2});
    for (int i = 0; i < n * c; ++i) {
      const real_t* src = self.grad.data() + static_cast<std::size_t>(i) * h * w;
      haar_forward_plane(src, h, w, ll.data(), lh.data(), hl.data(), hh.data());
      const int ni = i / c, ci = i % c;
      real_t* base = g.data() + (static_cast<std::size_t>(ni) * 4 * c + 4 * ci) * band;
      for (std::size_t k = 0; k < band; ++k) {
        base[k] += ll[k];
        base[band + k] += lh[k];
        base[2 * band + k] += hl[k];
        base[3 * band + k] += hh[k];
      }
    }
  });
}

Var window_correlate(const Var& x, const Tensor& kernel2d) {
  const Tensor& t = x->value;
  if (t.rank() != 4 || kernel2d.rank() != 2)
    throw ConfigError("window_correlate: expects rank-4 input and rank-2 kernel");
  const int n = t.dim(0), c = t.dim(1), h = t.dim(2), w = t.dim(3);
  const int kh = kernel2d.dim(0), kw = kernel2d.dim(1);
  if (kh > h || kw > w) throw ConfigError("window_correlate: kernel larger than input");
  const int ho = h - kh + 1, wo = w - kw + 1;
  Tensor out({n, c, ho, wo});
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n * c; ++i) {
    const real_t* src = t.data() + static_cast<std::size_t>(i) * h * w;
    real_t* dst = out.data() + static_cast<std::size_t>(i) * ho * wo;
    for (int oy = 0; oy < ho; ++oy)
      for (int ox = 0; ox < wo; ++ox) {
        real_t acc = 0.0;
        for (int ky = 0; ky < kh; ++ky) {
          const real_t* row = src + (oy + ky) * w + ox;
          const real_t* krow = kernel2d.data() + static_cast<std::size_t>(ky) * kw;
          for (int kx = 0; kx < kw; ++kx) acc += row[kx] * krow[kx];
        }
        dst[oy * wo + ox] = acc;
      }
  }
  Tensor kcopy = kernel2d;
  return unary(x, std::move(out), [n, c, h, w, kh, kw, ho, wo, kcopy](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n * c; ++i) {
      real_t* dst = g.data() + static_cast<std::size_t>(i) * h * w;
      const real_t* src = self.grad.data() + static_cast<std::size_t>(i) * ho * wo;
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          real_t gv = src[oy * wo + ox];
          for (int ky = 0; ky < kh; ++ky) {
            real_t* row = dst + (oy + ky) * w + ox;
            const real_t* krow = kcopy.data() + static_cast<std::size_t>(ky) * kw;
            for (int kx = 0; kx < kw; ++kx) row[kx] += gv * krow[kx];
          }
        }
    }
  });
}

}  // namespace dd
