#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dd/autograd.hpp"
#include "dd/rng.hpp"

namespace dd {

using NamedParams = std::vector<std::pair<std::string, Var>>;

/// 2D convolution with He-normal weight init and zero bias.
class Conv2dLayer {
 public:
  Conv2dLayer() = default;
  Conv2dLayer(int in_channels, int out_channels, int kernel, int stride, int pad, Rng& rng,
              real_t init_gain = 1.0);

  Var operator()(const Var& x) const { return conv2d(x, w_, b_, stride_, pad_); }

  Var weight() const { return w_; }
  Var bias() const { return b_; }
  void named_params(const std::string& prefix, NamedParams& out) const;

 private:
  Var w_, b_;
  int stride_ = 1, pad_ = 1;
};

class LinearLayer {
 public:
  LinearLayer() = default;
  LinearLayer(int in_features, int out_features, Rng& rng, real_t init_gain = 1.0);

  Var operator()(const Var& x) const { return linear(x, w_, b_); }
  void named_params(const std::string& prefix, NamedParams& out) const;

 private:
  Var w_, b_;
};

/// Squeeze-and-excitation channel recalibration. Squeeze is a global average
/// pool, excitation a two-layer bottleneck with reduction ratio `reduction`
/// and a sigmoid gate, applied multiplicatively per channel.
class SeBlock {
 public:
  SeBlock() = default;
  SeBlock(int channels, int reduction, Rng& rng);

  Var operator()(const Var& x) const;
  /// Gate values for an input, shape (N,C); handy for tests.
  Var gates(const Var& x) const;
  void named_params(const std::string& prefix, NamedParams& out) const;

  int channels() const { return channels_; }

 private:
  LinearLayer fc1_, fc2_;
  int channels_ = 0;
};

/// Flatten parameter list from named form.
std::vector<Var> params_of(const NamedParams& named);

/// requires_grad toggle for a whole parameter set (model freezing).
void set_trainable(const NamedParams& named, bool trainable);

/// Deterministic checksum of parameter values (update-isolation tests).
real_t params_checksum(const NamedParams& named);

/// Deep copies of parameter values, and their restoration (best-model
/// snapshots, divergence rollback).
std::vector<Tensor> snapshot_params(const NamedParams& named);
void restore_params(const NamedParams& named, const std::vector<Tensor>& snapshot);

}  // namespace dd
