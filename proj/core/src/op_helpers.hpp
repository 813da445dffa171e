#pragma once

// Internal helpers for building graph nodes. Not installed.

#include <utility>

#include "dd/autograd.hpp"

namespace dd::detail {

inline Var unary(const Var& x, Tensor value, std::function<void(Node&)> bp) {
  auto out = std::make_shared<Node>(std::move(value));
  if (grad_enabled() && x->requires_grad) {
    out->requires_grad = true;
    out->parents = {x};
    out->backprop = std::move(bp);
  }
  return out;
}

inline Var binary(const Var& a, const Var& b, Tensor value, std::function<void(Node&)> bp) {
  auto out = std::make_shared<Node>(std::move(value));
  if (grad_enabled() && (a->requires_grad || b->requires_grad)) {
    out->requires_grad = true;
    out->parents = {a, b};
    out->backprop = std::move(bp);
  }
  return out;
}

}  // namespace dd::detail
