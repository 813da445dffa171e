#pragma once

#include <cstddef>
#include <vector>

namespace dd {

using real_t = double;

/// Dense row-major tensor of doubles, rank 0..4. Images and feature maps use
/// NCHW order; matrices are (rows, cols); a rank-0 tensor is a scalar.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int> shape);

  static Tensor zeros(std::vector<int> shape);
  static Tensor full(std::vector<int> shape, real_t value);
  static Tensor scalar(real_t value);
  static Tensor from_data(std::vector<int> shape, std::vector<real_t> data);

  const std::vector<int>& shape() const { return shape_; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  std::size_t numel() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  bool same_shape(const Tensor& other) const { return shape_ == other.shape_; }

  real_t* data() { return data_.data(); }
  const real_t* data() const { return data_.data(); }
  real_t& operator[](std::size_t i) { return data_[i]; }
  real_t operator[](std::size_t i) const { return data_[i]; }

  // Rank-specific indexing helpers (no bounds checks in release builds).
  real_t& at4(int n, int c, int h, int w) {
    return data_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  real_t at4(int n, int c, int h, int w) const {
    return data_[((static_cast<std::size_t>(n) * shape_[1] + c) * shape_[2] + h) * shape_[3] + w];
  }
  real_t& at3(int c, int h, int w) {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + h) * shape_[2] + w];
  }
  real_t at3(int c, int h, int w) const {
    return data_[(static_cast<std::size_t>(c) * shape_[1] + h) * shape_[2] + w];
  }
  real_t& at2(int r, int c) { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }
  real_t at2(int r, int c) const { return data_[static_cast<std::size_t>(r) * shape_[1] + c]; }

  /// Value of a single-element tensor.
  real_t item() const;

  void fill(real_t value);
  /// Sum of all elements (sequential, deterministic order).
  real_t sum() const;
  real_t min() const;
  real_t max() const;
  bool all_finite() const;

  /// Reinterpret with a new shape of identical element count.
  Tensor reshaped(std::vector<int> shape) const;

 private:
  std::vector<int> shape_;
  std::vector<real_t> data_;
};

/// Checked elementwise helpers used across the code base.
Tensor operator+(const Tensor& a, const Tensor& b);
Tensor operator-(const Tensor& a, const Tensor& b);
Tensor operator*(real_t s, const Tensor& a);

}  // namespace dd
