#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dd/autograd.hpp"

namespace dd {

class CheckpointWriter;
class Checkpoint;

/// Adam with bias correction. One instance owns the first/second moment
/// state for a fixed parameter list.
class Adam {
 public:
  Adam(std::vector<Var> params, real_t lr, real_t beta1 = 0.9, real_t beta2 = 0.999,
       real_t eps = 1e-8);

  void zero_grad();
  void step();

  real_t learning_rate() const { return lr_; }
  void set_learning_rate(real_t lr) { lr_ = lr; }
  std::int64_t step_count() const { return t_; }

  /// Moment state round-trips through checkpoints so a resumed run continues
  /// bitwise-identically.
  void save_state(CheckpointWriter& w, const std::string& prefix) const;
  void load_state(const Checkpoint& c, const std::string& prefix);

 private:
  std::vector<Var> params_;
  std::vector<Tensor> m_, v_;
  real_t lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
};

}  // namespace dd
