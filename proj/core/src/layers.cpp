#include "dd/layers.hpp"

#include <cmath>

#include "dd/error.hpp"

namespace dd {
namespace {

Tensor he_normal(std::vector<int> shape, std::size_t fan_in, Rng& rng, real_t gain) {
  Tensor t(std::move(shape));
  const real_t stddev = gain * std::sqrt(2.0 / static_cast<real_t>(fan_in));
  for (std::size_t i = 0; i < t.numel(); ++i) t[i] = rng.normal(0.0, stddev);
  return t;
}

}  // namespace

Conv2dLayer::Conv2dLayer(int in_channels, int out_channels, int kernel, int stride, int pad,
                         Rng& rng, real_t init_gain)
    : stride_(stride), pad_(pad) {
  const std::size_t fan_in = static_cast<std::size_t>(in_channels) * kernel * kernel;
  w_ = make_param(he_normal({out_channels, in_channels, kernel, kernel}, fan_in, rng, init_gain));
  b_ = make_param(Tensor::zeros({out_channels}));
}

void Conv2dLayer::named_params(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".w", w_);
  out.emplace_back(prefix + ".b", b_);
}

LinearLayer::LinearLayer(int in_features, int out_features, Rng& rng, real_t init_gain) {
  w_ = make_param(he_normal({out_features, in_features}, static_cast<std::size_t>(in_features),
                            rng, init_gain));
  b_ = make_param(Tensor::zeros({out_features}));
}

void LinearLayer::named_params(const std::string& prefix, NamedParams& out) const {
  out.emplace_back(prefix + ".w", w_);
  out.emplace_back(prefix + ".b", b_);
}

SeBlock::SeBlock(int channels, int reduction, Rng& rng) : channels_(channels) {
  if (channels < reduction)
    throw ConfigError("SeBlock: channels (" + std::to_string(channels) +
                      ") must be >= reduction ratio (" + std::to_string(reduction) + ")");
  const int hidden = channels / reduction;
  fc1_ = LinearLayer(channels, hidden, rng);
  fc2_ = LinearLayer(hidden, channels, rng);
}

Var SeBlock::gates(const Var& x) const {
  Var squeezed = global_avg_pool(x);
  return sigmoid(fc2_(relu(fc1_(squeezed))));
}

Var SeBlock::operator()(const Var& x) const { return channel_scale(x, gates(x)); }

void SeBlock::named_params(const std::string& prefix, NamedParams& out) const {
  fc1_.named_params(prefix + ".fc1", out);
  fc2_.named_params(prefix + ".fc2", out);
}

std::vector<Var> params_of(const NamedParams& named) {
  std::vector<Var> out;
  out.reserve(named.size());
  for (const auto& [name, v] : named) out.push_back(v);
  return out;
}

void set_trainable(const NamedParams& named, bool trainable) {
  for (const auto& [name, v] : named) v->requires_grad = trainable;
}

real_t params_checksum(const NamedParams& named) {
  // Order-dependent weighted sum; any parameter change moves it.
  real_t acc = 0.0;
  std::size_t k = 1;
  for (const auto& [name, v] : named)
    for (std::size_t i = 0; i < v->value.numel(); ++i, ++k)
      acc += v->value[i] * std::sin(static_cast<real_t>(k % 9973) + 1.0);
  return acc;
}

std::vector<Tensor> snapshot_params(const NamedParams& named) {
  std::vector<Tensor> out;
  out.reserve(named.size());
  for (const auto& [name, v] : named) out.push_back(v->value);
  return out;
}

void restore_params(const NamedParams& named, const std::vector<Tensor>& snapshot) {
  if (named.size() != snapshot.size())
    throw ConfigError("restore_params: parameter count mismatch");
  for (std::size_t i = 0; i < named.size(); ++i) {
    if (!named[i].second->value.same_shape(snapshot[i]))
      throw ConfigError("restore_params: shape mismatch at " + named[i].first);
    named[i].second->value = snapshot[i];
  }
}

}  // namespace dd
