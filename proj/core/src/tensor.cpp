#include "dd/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dd/error.hpp"

namespace dd {
namespace {

std::size_t shape_numel(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw ConfigError("Tensor: nonpositive dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

}  // namespace

Tensor::Tensor(std::vector<int> shape)
    : shape_(std::move(shape)), data_(shape_numel(shape_), 0.0) {}

Tensor Tensor::zeros(std::vector<int> shape) { return Tensor(std::move(shape)); }

Tensor Tensor::full(std::vector<int> shape, real_t value) {
  Tensor t(std::move(shape));
  t.fill(value);
  return t;
}

Tensor Tensor::scalar(real_t value) {
  Tensor t;
  t.shape_ = {};
  t.data_.assign(1, value);
  return t;
}

Tensor Tensor::from_data(std::vector<int> shape, std::vector<real_t> data) {
  Tensor t;
  if (shape_numel(shape) != data.size())
    throw ConfigError("Tensor::from_data: shape does not match data size");
  t.shape_ = std::move(shape);
  t.data_ = std::move(data);
  return t;
}

real_t Tensor::item() const {
  if (data_.size() != 1) throw RuntimeFailure("Tensor::item: tensor is not a scalar");
  return data_[0];
}

void Tensor::fill(real_t value) { std::fill(data_.begin(), data_.end(), value); }

real_t Tensor::sum() const {
  real_t acc = 0.0;
  for (real_t v : data_) acc += v;
  return acc;
}

real_t Tensor::min() const { return *std::min_element(data_.begin(), data_.end()); }
real_t Tensor::max() const { return *std::max_element(data_.begin(), data_.end()); }

bool Tensor::all_finite() const {
  for (real_t v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor Tensor::reshaped(std::vector<int> shape) const {
  if (shape_numel(shape) != data_.size())
    throw ConfigError("Tensor::reshaped: element count mismatch");
  Tensor t;
  t.shape_ = std::move(shape);
  t.data_ = data_;
  return t;
}

Tensor operator+(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ConfigError("Tensor +: shape mismatch");
  Tensor out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += b[i];
  return out;
}

Tensor operator-(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) throw ConfigError("Tensor -: shape mismatch");
  Tensor out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] -= b[i];
  return out;
}

Tensor operator*(real_t s, const Tensor& a) {
  Tensor out = a;
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= s;
  return out;
}

}  // namespace dd
