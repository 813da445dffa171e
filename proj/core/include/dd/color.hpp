#pragma once

#include "dd/tensor.hpp"

namespace dd {

/// BT.601 full-range luma of an RGB image: Y = 0.299 R + 0.587 G + 0.114 B.
/// Input (3,H,W) in [0,1], output (H,W) in [0,1].
Tensor ycbcr_y(const Tensor& img);

}  // namespace dd
