#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "dd/tensor.hpp"

namespace dd {

class Node;
using Var = std::shared_ptr<Node>;

/// One value in a define-by-run computation graph. Ops build nodes eagerly;
/// backward() walks the recorded graph in reverse topological order.
class Node {
 public:
  explicit Node(Tensor v) : value(std::move(v)) {}
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  Tensor value;
  Tensor grad;  // empty until first accumulation
  bool requires_grad = false;
  std::vector<Var> parents;
  std::function<void(Node&)> backprop;

  /// Gradient buffer, zero-allocated on first use.
  Tensor& ensure_grad() {
    if (grad.empty()) grad = Tensor::zeros(value.shape());
    return grad;
  }
};

/// Graph recording is on by default; disable for inference with NoGradGuard.
bool grad_enabled();

class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

/// Leaf that never receives gradients.
Var constant(Tensor v);
/// Leaf that accumulates gradients (model parameters, probe inputs).
Var make_param(Tensor v);
/// Same value, cut from the graph.
Var detach(const Var& x);

/// Reverse-mode sweep from a scalar root. Gradients accumulate into
/// Node::grad of every reachable node with requires_grad set.
void backward(const Var& root);

// ---- elementwise ----------------------------------------------------------
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var divide(const Var& a, const Var& b);
Var add_scalar(const Var& a, real_t s);
Var mul_scalar(const Var& a, real_t s);
/// s - a
Var scalar_minus(real_t s, const Var& a);
Var square(const Var& a);
Var vlog(const Var& a);
Var sigmoid(const Var& a);
Var tanh_op(const Var& a);
Var relu(const Var& a);
Var leaky_relu(const Var& a, real_t slope);
/// Pass-through gradient strictly inside (lo, hi), zero outside.
Var clamp(const Var& a, real_t lo, real_t hi);

// ---- reductions ------------------------------------------------------------
Var mean_all(const Var& a);
Var sum_all(const Var& a);

// ---- neural network ops (ops_nn.cpp) ---------------------------------------
/// x: (N,C,H,W), w: (O,C,kh,kw), b: (O). Zero padding, square stride.
Var conv2d(const Var& x, const Var& w, const Var& b, int stride, int pad);
/// x: (N,F), w: (O,F), b: (O) -> (N,O)
Var linear(const Var& x, const Var& w, const Var& b);
Var upsample_nearest2x(const Var& x);
/// (N,C,H,W) -> (N,C)
Var global_avg_pool(const Var& x);
/// (N,C,H,W) -> (N,C); ties resolve to the first maximum in scan order.
Var global_max_pool(const Var& x);
/// Multiply each channel map by a per-sample gate g: (N,C).
Var channel_scale(const Var& x, const Var& g);
Var concat_channels(const Var& a, const Var& b);
/// Channels [start, start+count) of an (N,C,H,W) tensor.
Var slice_channels(const Var& x, int start, int count);
/// (N,C) -> (N,C,H,W), value replicated over each plane.
Var broadcast_plane(const Var& v, int height, int width);
/// General matrix product (M,K) x (K,N) -> (M,N).
Var matmul(const Var& a, const Var& b);
/// Row sums of a rank-2 tensor: (N,K) -> (N,1).
Var sum_rows(const Var& x);
/// Rows scaled to unit Euclidean norm (eps-guarded): (N,K) -> (N,K).
Var l2_normalize_rows(const Var& x);

// ---- image-domain ops (ops_img.cpp) -----------------------------------------
/// BT.601 full-range luma: (N,3,H,W) -> (N,1,H,W)
Var rgb_to_y(const Var& x);
/// Orthonormal one-level 2D Haar analysis. (N,C,H,W) -> (N,4C,H/2,W/2),
/// band order LL,LH,HL,HH per input channel. H and W must be even.
Var haar2(const Var& x);
/// Inverse of haar2. (N,4C,h,w) -> (N,C,2h,2w)
Var ihaar2(const Var& x);
/// Depthwise VALID cross-correlation with one fixed (non-learnable) kernel.
Var window_correlate(const Var& x, const Tensor& kernel2d);

}  // namespace dd
