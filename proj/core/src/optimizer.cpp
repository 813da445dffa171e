#include "dd/optimizer.hpp"

#include <cmath>

#include "dd/checkpoint.hpp"
#include "dd/error.hpp"

namespace dd {

Adam::Adam(std::vector<Var> params, real_t lr, real_t beta1, real_t beta2, real_t eps)
    : params_(std::move(params)), lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
  if (lr_ <= 0.0) throw ConfigError("Adam: learning rate must be positive");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    m_.push_back(Tensor::zeros(p->value.shape()));
    v_.push_back(Tensor::zeros(p->value.shape()));
  }
}

void Adam::zero_grad() {
  for (auto& p : params_)
    if (!p->grad.empty()) p->grad.fill(0.0);
}

void Adam::step() {
  ++t_;
  const real_t bc1 = 1.0 - std::pow(beta1_, static_cast<real_t>(t_));
  const real_t bc2 = 1.0 - std::pow(beta2_, static_cast<real_t>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Node& p = *params_[k];
    if (p.grad.empty()) continue;  // parameter untouched this step
    Tensor& m = m_[k];
    Tensor& v = v_[k];
    for (std::size_t i = 0; i < p.value.numel(); ++i) {
      const real_t g = p.grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const real_t mhat = m[i] / bc1;
      const real_t vhat = v[i] / bc2;
      p.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

void Adam::save_state(CheckpointWriter& w, const std::string& prefix) const {
  w.set_meta_int(prefix + ".t", t_);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    w.add(prefix + ".m" + std::to_string(k), m_[k]);
    w.add(prefix + ".v" + std::to_string(k), v_[k]);
  }
}

void Adam::load_state(const Checkpoint& c, const std::string& prefix) {
  t_ = c.meta_int(prefix + ".t");
  for (std::size_t k = 0; k < params_.size(); ++k) {
    m_[k] = c.tensor(prefix + ".m" + std::to_string(k));
    v_[k] = c.tensor(prefix + ".v" + std::to_string(k));
    if (!m_[k].same_shape(params_[k]->value))
      throw RuntimeFailure("Adam::load_state: moment shape mismatch at index " +
                           std::to_string(k));
  }
}

}  // namespace dd
