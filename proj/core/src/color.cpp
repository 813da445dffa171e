#include "dd/color.hpp"

#include "dd/error.hpp"

namespace dd {

Tensor ycbcr_y(const Tensor& img) {
  if (img.rank() != 3 || img.dim(0) != 3) throw ConfigError("ycbcr_y: expects (3,H,W)");
  const int h = img.dim(1), w = img.dim(2);
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  Tensor y({h, w});
  const real_t* r = img.data();
  const real_t* g = r + plane;
  const real_t* b = g + plane;
  for (std::size_t k = 0; k < plane; ++k) y[k] = 0.299 * r[k] + 0.587 * g[k] + 0.114 * b[k];
  return y;
}

}  // namespace dd
