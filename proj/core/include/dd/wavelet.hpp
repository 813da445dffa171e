#pragma once

#include "dd/tensor.hpp"

namespace dd {

/// One-level subband split of a single channel. Each band is (H/2, W/2).
struct DWTSubbands {
  Tensor ll, lh, hl, hh;
};

/// Orthonormal one-level 2D Haar analysis of a rank-2 channel. Even
/// dimensions required. Invertible: idwt2_haar(dwt2_haar(x)) == x.
DWTSubbands dwt2_haar(const Tensor& channel);
Tensor idwt2_haar(const DWTSubbands& bands);

}  // namespace dd
