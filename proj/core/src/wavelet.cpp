#include "dd/wavelet.hpp"

#include "dd/error.hpp"
#include "haar_kernels.hpp"

namespace dd {

DWTSubbands dwt2_haar(const Tensor& channel) {
  if (channel.rank() != 2) throw ConfigError("dwt2_haar: expects a rank-2 channel");
  const int h = channel.dim(0), w = channel.dim(1);
  if (h % 2 != 0 || w % 2 != 0) throw ConfigError("dwt2_haar: dimensions must be even");
  DWTSubbands out{Tensor({h / 2, w / 2}), Tensor({h / 2, w / 2}), Tensor({h / 2, w / 2}),
                  Tensor({h / 2, w / 2})};
  detail::haar_forward_plane(channel.data(), h, w, out.ll.data(), out.lh.data(), out.hl.data(),
                             out.hh.data());
  return out;
}

Tensor idwt2_haar(const DWTSubbands& bands) {
  if (bands.ll.rank() != 2 || !bands.ll.same_shape(bands.lh) || !bands.ll.same_shape(bands.hl) ||
      !bands.ll.same_shape(bands.hh))
    throw ConfigError("idwt2_haar: bands must share a rank-2 shape");
  const int h2 = bands.ll.dim(0), w2 = bands.ll.dim(1);
  Tensor out({2 * h2, 2 * w2});
  detail::haar_inverse_plane(bands.ll.data(), bands.lh.data(), bands.hl.data(), bands.hh.data(),
                             h2, w2, out.data());
  return out;
}

}  // namespace dd
