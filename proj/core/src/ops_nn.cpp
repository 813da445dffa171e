#include <Eigen/Dense>
#include <cmath>
#include <cstring>

#include "dd/autograd.hpp"
#include "dd/error.hpp"
#include "op_helpers.hpp"

namespace dd {
using detail::binary;
using detail::unary;
namespace {

using EMat = Eigen::Matrix<real_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

struct ConvDims {
  int n, c, h, w;      // input
  int o, kh, kw;       // kernel
  int stride, pad;
  int ho, wo;
  std::size_t col_rows() const { return static_cast<std::size_t>(c) * kh * kw; }
  std::size_t col_cols() const { return static_cast<std::size_t>(ho) * wo; }
};

ConvDims conv_dims(const Tensor& x, const Tensor& w, int stride, int pad) {
  if (x.rank() != 4 || w.rank() != 4) throw ConfigError("conv2d: expects rank-4 tensors");
  if (x.dim(1) != w.dim(1)) throw ConfigError("conv2d: channel mismatch");
  ConvDims d;
  d.n = x.dim(0); d.c = x.dim(1); d.h = x.dim(2); d.w = x.dim(3);
  d.o = w.dim(0); d.kh = w.dim(2); d.kw = w.dim(3);
  d.stride = stride; d.pad = pad;
  d.ho = (d.h + 2 * pad - d.kh) / stride + 1;
  d.wo = (d.w + 2 * pad - d.kw) / stride + 1;
  if (d.ho <= 0 || d.wo <= 0) throw ConfigError("conv2d: kernel larger than padded input");
  return d;
}

void im2col(const real_t* img, const ConvDims& d, real_t* col) {
  // col is (c*kh*kw) x (ho*wo), row-major.
  for (int c = 0; c < d.c; ++c) {
    const real_t* plane = img + static_cast<std::size_t>(c) * d.h * d.w;
    for (int ki = 0; ki < d.kh; ++ki) {
      for (int kj = 0; kj < d.kw; ++kj) {
        real_t* row = col + ((static_cast<std::size_t>(c) * d.kh + ki) * d.kw + kj) * d.col_cols();
        for (int oh = 0; oh < d.ho; ++oh) {
          int ih = oh * d.stride - d.pad + ki;
          real_t* dst = row + static_cast<std::size_t>(oh) * d.wo;
          if (ih < 0 || ih >= d.h) {
            std::memset(dst, 0, sizeof(real_t) * d.wo);
            continue;
          }
          const real_t* src = plane + static_cast<std::size_t>(ih) * d.w;
          for (int ow = 0; ow < d.wo; ++ow) {
            int iw = ow * d.stride - d.pad + kj;
            dst[ow] = (iw >= 0 && iw < d.w) ? src[iw] : 0.0;
          }
        }
      }
    }
  }
}

void col2im_add(const real_t* col, const ConvDims& d, real_t* img) {
  for (int c = 0; c < d.c; ++c) {
    real_t* plane = img + static_cast<std::size_t>(c) * d.h * d.w;
    for (int ki = 0; ki < d.kh; ++ki) {
      for (int kj = 0; kj < d.kw; ++kj) {
        const real_t* row =
            col + ((static_cast<std::size_t>(c) * d.kh + ki) * d.kw + kj) * d.col_cols();
        for (int oh = 0; oh < d.ho; ++oh) {
          int ih = oh * d.stride - d.pad + ki;
          if (ih < 0 || ih >= d.h) continue;
          real_t* dst = plane + static_cast<std::size_t>(ih) * d.w;
          const real_t* src = row + static_cast<std::size_t>(oh) * d.wo;
          for (int ow = 0; ow < d.wo; ++ow) {
            int iw = ow * d.stride - d.pad + kj;
            if (iw >= 0 && iw < d.w) dst[iw] += src[ow];
          }
        }
      }
    }
  }
}

thread_local std::vector<real_t> tl_col;

}  // namespace

Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad) {
  const ConvDims d = conv_dims(x->value, w->value, stride, pad);
  if (b->value.numel() != static_cast<std::size_t>(d.o))
    throw ConfigError("conv2d: bias size mismatch");

  Tensor out({d.n, d.o, d.ho, d.wo});
  const std::size_t cr = d.col_rows(), cc = d.col_cols();

#pragma omp parallel for schedule(static)
  for (int n = 0; n < d.n; ++n) {
    tl_col.resize(cr * cc);
    im2col(x->value.data() + static_cast<std::size_t>(n) * d.c * d.h * d.w, d, tl_col.data());
    ECMap W(w->value.data(), d.o, static_cast<Eigen::Index>(cr));
    ECMap C(tl_col.data(), static_cast<Eigen::Index>(cr), static_cast<Eigen::Index>(cc));
    EMap O(out.data() + static_cast<std::size_t>(n) * d.o * cc, d.o, static_cast<Eigen::Index>(cc));
    O.noalias() = W * C;
    for (int oc = 0; oc < d.o; ++oc) O.row(oc).array() += b->value[oc];
  }

  auto node = std::make_shared<Node>(std::move(out));
  if (grad_enabled() && (x->requires_grad || w->requires_grad || b->requires_grad)) {
    node->requires_grad = true;
    node->parents = {x, w, b};
    node->backprop = [d, cr, cc](Node& self) {
      Node& px = *self.parents[0];
      Node& pw = *self.parents[1];
      Node& pb = *self.parents[2];
      const bool need_x = px.requires_grad;
      const bool need_w = pw.requires_grad;
      const bool need_b = pb.requires_grad;

      // Per-sample weight-gradient slabs reduced in index order afterwards,
      // so the result does not depend on the thread schedule.
      std::vector<real_t> wslab;
      if (need_w) wslab.assign(static_cast<std::size_t>(d.n) * d.o * cr, 0.0);
      if (need_x) px.ensure_grad();

#pragma omp parallel for schedule(static)
      for (int n = 0; n < d.n; ++n) {
        ECMap G(self.grad.data() + static_cast<std::size_t>(n) * d.o * cc, d.o,
                static_cast<Eigen::Index>(cc));
        if (need_w) {
          tl_col.resize(cr * cc);
          im2col(px.value.data() + static_cast<std::size_t>(n) * d.c * d.h * d.w, d,
                 tl_col.data());
          ECMap C(tl_col.data(), static_cast<Eigen::Index>(cr), static_cast<Eigen::Index>(cc));
          EMap WS(wslab.data() + static_cast<std::size_t>(n) * d.o * cr, d.o,
                  static_cast<Eigen::Index>(cr));
          WS.noalias() = G * C.transpose();
        }
        if (need_x) {
          std::vector<real_t> dcol(cr * cc);
          ECMap W(pw.value.data(), d.o, static_cast<Eigen::Index>(cr));
          EMap DC(dcol.data(), static_cast<Eigen::Index>(cr), static_cast<Eigen::Index>(cc));
          DC.noalias() = W.transpose() * G;
          col2im_add(dcol.data(), d,
                     px.grad.data() + static_cast<std::size_t>(n) * d.c * d.h * d.w);
        }
      }

      if (need_w) {
        Tensor& gw = pw.ensure_grad();
        for (int n = 0; n < d.n; ++n) {
          const real_t* src = wslab.data() + static_cast<std::size_t>(n) * d.o * cr;
          for (std::size_t i = 0; i < static_cast<std::size_t>(d.o) * cr; ++i) gw[i] += src[i];
        }
      }
      if (need_b) {
        Tensor& gb = pb.ensure_grad();
        for (int n = 0; n < d.n; ++n)
          for (int oc = 0; oc < d.o; ++oc) {
            const real_t* row = self.grad.data() + (static_cast<std::size_t>(n) * d.o + oc) * cc;
            real_t acc = 0.0;
            for (std::size_t i = 0; i < cc; ++i) acc += row[i];
            gb[oc] += acc;
          }
      }
    };
  }
  return node;
}

Var linear(const Var& x, const Var& w, const Var& b) {
  if (x->value.rank() != 2 || w->value.rank() != 2)
    throw ConfigError("linear: expects rank-2 input and weights");
  const int n = x->value.dim(0), f = x->value.dim(1), o = w->value.dim(0);
  if (w->value.dim(1) != f || b->value.numel() != static_cast<std::size_t>(o))
    throw ConfigError("linear: dimension mismatch");

  Tensor out({n, o});
  {
    ECMap X(x->value.data(), n, f);
    ECMap W(w->value.data(), o, f);
    EMap O(out.data(), n, o);
    O.noalias() = X * W.transpose();
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < o; ++c) O(r, c) += b->value[c];
  }

  auto node = std::make_shared<Node>(std::move(out));
  if (grad_enabled() && (x->requires_grad || w->requires_grad || b->requires_grad)) {
    node->requires_grad = true;
    node->parents = {x, w, b};
    node->backprop = [n, f, o](Node& self) {
      Node& px = *self.parents[0];
      Node& pw = *self.parents[1];
      Node& pb = *self.parents[2];
      ECMap G(self.grad.data(), n, o);
      if (px.requires_grad) {
        EMap GX(px.ensure_grad().data(), n, f);
        ECMap W(pw.value.data(), o, f);
        GX.noalias() += G * W;
      }
      if (pw.requires_grad) {
        EMap GW(pw.ensure_grad().data(), o, f);
        ECMap X(px.value.data(), n, f);
        GW.noalias() += G.transpose() * X;
      }
      if (pb.requires_grad) {
        Tensor& gb = pb.ensure_grad();
        for (int r = 0; r < n; ++r)
          for (int c = 0; c < o; ++c) gb[c] += G(r, c);
      }
    };
  }
  return node;
}

Var upsample_nearest2x(const Var& x) {
  if (x->value.rank() != 4) throw ConfigError("upsample_nearest2x: expects rank-4");
  const int n = x->value.dim(0), c = x->value.dim(1), h = x->value.dim(2), w = x->value.dim(3);
  Tensor out({n, c, 2 * h, 2 * w});
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n * c; ++i) {
    const real_t* src = x->value.data() + static_cast<std::size_t>(i) * h * w;
    real_t* dst = out.data() + static_cast<std::size_t>(i) * 4 * h * w;
    for (int y = 0; y < h; ++y)
      for (int xx = 0; xx < w; ++xx) {
        real_t v = src[y * w + xx];
        real_t* d0 = dst + (2 * y) * (2 * w) + 2 * xx;
        d0[0] = v;
        d0[1] = v;
        d0[2 * w] = v;
        d0[2 * w + 1] = v;
      }
  }
  return unary(x, std::move(out), [n, c, h, w](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n * c; ++i) {
      real_t* dst = g.data() + static_cast<std::size_t>(i) * h * w;
      const real_t* src = self.grad.data() + static_cast<std::size_t>(i) * 4 * h * w;
      for (int y = 0; y < h; ++y)
        for (int xx = 0; xx < w; ++xx) {
          const real_t* s0 = src + (2 * y) * (2 * w) + 2 * xx;
          dst[y * w + xx] += s0[0] + s0[1] + s0[2 * w] + s0[2 * w + 1];
        }
    }
  });
}

Var global_avg_pool(const Var& x) {
  if (x->value.rank() != 4) throw ConfigError("global_avg_pool: expects rank-4");
  const int n = x->value.dim(0), c = x->value.dim(1);
  const std::size_t plane = static_cast<std::size_t>(x->value.dim(2)) * x->value.dim(3);
  const real_t inv = 1.0 / static_cast<real_t>(plane);
  Tensor out({n, c});
  for (int i = 0; i < n * c; ++i) {
    const real_t* src = x->value.data() + static_cast<std::size_t>(i) * plane;
    real_t acc = 0.0;
    for (std::size_t k = 0; k < plane; ++k) acc += src[k];
    out[static_cast<std::size_t>(i)] = acc * inv;
  }
  return unary(x, std::move(out), [n, c, plane, inv](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (int i = 0; i < n * c; ++i) {
      real_t gv = self.grad[static_cast<std::size_t>(i)] * inv;
      real_t* dst = g.data() + static_cast<std::size_t>(i) * plane;
      for (std::size_t k = 0; k < plane; ++k) dst[k] += gv;
    }
  });
}

Var global_max_pool(const Var& x) {
  if (x->value.rank() != 4) throw ConfigError("global_max_pool: expects rank-4");
  const int n = x->value.dim(0), c = x->value.dim(1);
  const std::size_t plane = static_cast<std::size_t>(x->value.dim(2)) * x->value.dim(3);
  Tensor out({n, c});
  auto argmax = std::make_shared<std::vector<std::size_t>>(static_cast<std::size_t>(n) * c);
  for (int i = 0; i < n * c; ++i) {
    const real_t* src = x->value.data() + static_cast<std::size_t>(i) * plane;
    std::size_t best = 0;
    for (std::size_t k = 1; k < plane; ++k)
      if (src[k] > src[best]) best = k;
    out[static_cast<std::size_t>(i)] = src[best];
    (*argmax)[static_cast<std::size_t>(i)] = best;
  }
  return unary(x, std::move(out), [n, c, plane, argmax](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (int i = 0; i < n * c; ++i)
      g[static_cast<std::size_t>(i) * plane + (*argmax)[static_cast<std::size_t>(i)]] +=
          self.grad[static_cast<std::size_t>(i)];
  });
}

Var channel_scale(const Var& x, const Var& g) {
  if (x->value.rank() != 4 || g->value.rank() != 2)
    throw ConfigError("channel_scale: expects (N,C,H,W) and (N,C)");
  const int n = x->value.dim(0), c = x->value.dim(1);
  if (g->value.dim(0) != n || g->value.dim(1) != c)
    throw ConfigError("channel_scale: gate shape mismatch");
  const std::size_t plane = static_cast<std::size_t>(x->value.dim(2)) * x->value.dim(3);
  Tensor out = x->value;
  for (int i = 0; i < n * c; ++i) {
    real_t gv = g->value[static_cast<std::size_t>(i)];
    real_t* dst = out.data() + static_cast<std::size_t>(i) * plane;
    for (std::size_t k = 0; k < plane; ++k) dst[k] *= gv;
  }
  return binary(x, g, std::move(out), [n, c, plane](Node& self) {
    Node& px = *self.parents[0];
    Node& pg = *self.parents[1];
    if (px.requires_grad) {
      Tensor& gx = px.ensure_grad();
      for (int i = 0; i < n * c; ++i) {
        real_t gv = pg.value[static_cast<std::size_t>(i)];
        const real_t* src = self.grad.data() + static_cast<std::size_t>(i) * plane;
        real_t* dst = gx.data() + static_cast<std::size_t>(i) * plane;
        for (std::size_t k = 0; k < plane; ++k) dst[k] += src[k] * gv;
      }
    }
    if (pg.requires_grad) {
      Tensor& gg = pg.ensure_grad();
      for (int i = 0; i < n * c; ++i) {
        const real_t* go = self.grad.data() + static_cast<std::size_t>(i) * plane;
        const real_t* xv = px.value.data() + static_cast<std::size_t>(i) * plane;
        real_t acc = 0.0;
        for (std::size_t k = 0; k < plane; ++k) acc += go[k] * xv[k];
        gg[static_cast<std::size_t>(i)] += acc;
      }
    }
  });
}

Var concat_channels(const Var& a, const Var& b) {
  const Tensor& ta = a->value;
  const Tensor& tb = b->value;
  if (ta.rank() != 4 || tb.rank() != 4 || ta.dim(0) != tb.dim(0) || ta.dim(2) != tb.dim(2) ||
      ta.dim(3) != tb.dim(3))
    throw ConfigError("concat_channels: incompatible shapes");
  const int n = ta.dim(0), ca = ta.dim(1), cb = tb.dim(1);
  const std::size_t plane = static_cast<std::size_t>(ta.dim(2)) * ta.dim(3);
  Tensor out({n, ca + cb, ta.dim(2), ta.dim(3)});
  for (int i = 0; i < n; ++i) {
    std::memcpy(out.data() + static_cast<std::size_t>(i) * (ca + cb) * plane,
                ta.data() + static_cast<std::size_t>(i) * ca * plane,
                sizeof(real_t) * ca * plane);
    std::memcpy(out.data() + (static_cast<std::size_t>(i) * (ca + cb) + ca) * plane,
                tb.data() + static_cast<std::size_t>(i) * cb * plane,
                sizeof(real_t) * cb * plane);
  }
  return binary(a, b, std::move(out), [n, ca, cb, plane](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      Tensor& g = pa.ensure_grad();
      for (int i = 0; i < n; ++i) {
        const real_t* src = self.grad.data() + static_cast<std::size_t>(i) * (ca + cb) * plane;
        real_t* dst = g.data() + static_cast<std::size_t>(i) * ca * plane;
        for (std::size_t k = 0; k < static_cast<std::size_t>(ca) * plane; ++k) dst[k] += src[k];
      }
    }
    if (pb.requires_grad) {
      Tensor& g = pb.ensure_grad();
      for (int i = 0; i < n; ++i) {
        const real_t* src =
            self.grad.data() + (static_cast<std::size_t>(i) * (ca + cb) + ca) * plane;
        real_t* dst = g.data() + static_cast<std::size_t>(i) * cb * plane;
        for (std::size_t k = 0; k < static_cast<std::size_t>(cb) * plane; ++k) dst[k] += src[k];
      }
    }
  });
}

Var slice_channels(const Var& x, int start, int count) {
  const Tensor& t = x->value;
  if (t.rank() != 4) throw ConfigError("slice_channels: expects rank-4");
  const int n = t.dim(0), c = t.dim(1);
  if (start < 0 || count <= 0 || start + count > c)
    throw ConfigError("slice_channels: range out of bounds");
  const std::size_t plane = static_cast<std::size_t>(t.dim(2)) * t.dim(3);
  Tensor out({n, count, t.dim(2), t.dim(3)});
  for (int i = 0; i < n; ++i)
    std::memcpy(out.data() + static_cast<std::size_t>(i) * count * plane,
                t.data() + (static_cast<std::size_t>(i) * c + start) * plane,
                sizeof(real_t) * count * plane);
  return unary(x, std::move(out), [n, c, start, count, plane](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (int i = 0; i < n; ++i) {
      const real_t* src = self.grad.data() + static_cast<std::size_t>(i) * count * plane;
      real_t* dst = g.data() + (static_cast<std::size_t>(i) * c + start) * plane;
      for (std::size_t k = 0; k < static_cast<std::size_t>(count) * plane; ++k) dst[k] += src[k];
    }
  });
}

Var matmul(const Var& a, const Var& b) {
  const Tensor& ta = a->value;
  const Tensor& tb = b->value;
  if (ta.rank() != 2 || tb.rank() != 2 || ta.dim(1) != tb.dim(0))
    throw ConfigError("matmul: incompatible shapes");
  const int m = ta.dim(0), k = ta.dim(1), n = tb.dim(1);
  Tensor out({m, n});
  {
    ECMap A(ta.data(), m, k);
    ECMap B(tb.data(), k, n);
    EMap O(out.data(), m, n);
    O.noalias() = A * B;
  }
  return binary(a, b, std::move(out), [m, k, n](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    ECMap G(self.grad.data(), m, n);
    if (pa.requires_grad) {
      EMap GA(pa.ensure_grad().data(), m, k);
      ECMap B(pb.value.data(), k, n);
      GA.noalias() += G * B.transpose();
    }
    if (pb.requires_grad) {
      EMap GB(pb.ensure_grad().data(), k, n);
      ECMap A(pa.value.data(), m, k);
      GB.noalias() += A.transpose() * G;
    }
  });
}

Var sum_rows(const Var& x) {
  if (x->value.rank() != 2) throw ConfigError("sum_rows: expects rank-2");
  const int n = x->value.dim(0), k = x->value.dim(1);
  Tensor out({n, 1});
  for (int i = 0; i < n; ++i) {
    real_t acc = 0.0;
    for (int j = 0; j < k; ++j) acc += x->value.at2(i, j);
    out.at2(i, 0) = acc;
  }
  return unary(x, std::move(out), [n, k](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (int i = 0; i < n; ++i) {
      real_t gv = self.grad.at2(i, 0);
      for (int j = 0; j < k; ++j) g.at2(i, j) += gv;
    }
  });
}

Var l2_normalize_rows(const Var& x) {
  if (x->value.rank() != 2) throw ConfigError("l2_normalize_rows: expects rank-2");
  const int n = x->value.dim(0), k = x->value.dim(1);
  constexpr real_t kEps = 1e-12;
  Tensor out({n, k});
  auto norms = std::make_shared<std::vector<real_t>>(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    real_t s = 0.0;
    for (int j = 0; j < k; ++j) s += x->value.at2(i, j) * x->value.at2(i, j);
    real_t r = std::sqrt(s + kEps);
    (*norms)[static_cast<std::size_t>(i)] = r;
    for (int j = 0; j < k; ++j) out.at2(i, j) = x->value.at2(i, j) / r;
  }
  return unary(x, std::move(out), [n, k, norms](Node& self) {
    // y = x/r  =>  dx = (g - y (g.y)) / r per row.
    Tensor& g = self.parents[0]->ensure_grad();
    for (int i = 0; i < n; ++i) {
      real_t dot = 0.0;
      for (int j = 0; j < k; ++j) dot += self.grad.at2(i, j) * self.value.at2(i, j);
      real_t r = (*norms)[static_cast<std::size_t>(i)];
      for (int j = 0; j < k; ++j)
        g.at2(i, j) += (self.grad.at2(i, j) - self.value.at2(i, j) * dot) / r;
    }
  });
}

Var broadcast_plane(const Var& v, int height, int width) {
  if (v->value.rank() != 2) throw ConfigError("broadcast_plane: expects (N,C)");
  const int n = v->value.dim(0), c = v->value.dim(1);
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  Tensor out({n, c, height, width});
  for (int i = 0; i < n * c; ++i) {
    real_t val = v->value[static_cast<std::size_t>(i)];
    real_t* dst = out.data() + static_cast<std::size_t>(i) * plane;
    for (std::size_t k = 0; k < plane; ++k) dst[k] = val;
  }
  return unary(v, std::move(out), [n, c, plane](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (int i = 0; i < n * c; ++i) {
      const real_t* src = self.grad.data() + static_cast<std::size_t>(i) * plane;
      real_t acc = 0.0;
      for (std::size_t k = 0; k < plane; ++k) acc += src[k];
      g[static_cast<std::size_t>(i)] += acc;
    }
  });
}

}  // namespace dd
