#include "dd/autograd.hpp"

#include <cmath>
#include <unordered_set>

#include "dd/error.hpp"
#include "op_helpers.hpp"

namespace dd {
namespace {

thread_local bool g_grad_enabled = true;

using detail::binary;
using detail::unary;

void check_same_shape(const Var& a, const Var& b, const char* op) {
  if (!a->value.same_shape(b->value))
    throw ConfigError(std::string(op) + ": shape mismatch");
}

}  // namespace

bool grad_enabled() { return g_grad_enabled; }

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

Var constant(Tensor v) { return std::make_shared<Node>(std::move(v)); }

Var make_param(Tensor v) {
  auto n = std::make_shared<Node>(std::move(v));
  n->requires_grad = true;
  return n;
}

Var detach(const Var& x) { return std::make_shared<Node>(x->value); }

void backward(const Var& root) {
  if (root->value.numel() != 1)
    throw RuntimeFailure("backward: root must be a scalar");
  if (!root->requires_grad) return;

  // Iterative DFS post-order over the requires_grad subgraph.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* node;
    std::size_t next_parent;
  };
  std::vector<Frame> stack{{root.get(), 0}};
  visited.insert(root.get());
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node* p = f.node->parents[f.next_parent++].get();
      if (p->requires_grad && !visited.count(p)) {
        visited.insert(p);
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  root->ensure_grad().fill(1.0);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop) n->backprop(*n);
  }
}

// ---- elementwise -------------------------------------------------------------

Var add(const Var& a, const Var& b) {
  check_same_shape(a, b, "add");
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] += b->value[i];
  return binary(a, b, std::move(v), [](Node& self) {
    for (int k = 0; k < 2; ++k) {
      Node& p = *self.parents[k];
      if (!p.requires_grad) continue;
      Tensor& g = p.ensure_grad();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape(a, b, "sub");
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] -= b->value[i];
  return binary(a, b, std::move(v), [](Node& self) {
    Node& pa = *self.parents[0];
    if (pa.requires_grad) {
      Tensor& g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
    }
    Node& pb = *self.parents[1];
    if (pb.requires_grad) {
      Tensor& g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= self.grad[i];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape(a, b, "mul");
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] *= b->value[i];
  return binary(a, b, std::move(v), [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      Tensor& g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * pb.value[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * pa.value[i];
    }
  });
}

Var divide(const Var& a, const Var& b) {
  check_same_shape(a, b, "divide");
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] /= b->value[i];
  return binary(a, b, std::move(v), [](Node& self) {
    Node& pa = *self.parents[0];
    Node& pb = *self.parents[1];
    if (pa.requires_grad) {
      Tensor& g = pa.ensure_grad();
      for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] / pb.value[i];
    }
    if (pb.requires_grad) {
      Tensor& g = pb.ensure_grad();
      for (std::size_t i = 0; i < g.numel(); ++i) {
        real_t bv = pb.value[i];
        g[i] -= self.grad[i] * pa.value[i] / (bv * bv);
      }
    }
  });
}

Var add_scalar(const Var& a, real_t s) {
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] += s;
  return unary(a, std::move(v), [](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i];
  });
}

Var mul_scalar(const Var& a, real_t s) {
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] *= s;
  return unary(a, std::move(v), [s](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] * s;
  });
}

Var scalar_minus(real_t s, const Var& a) {
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] = s - v[i];
  return unary(a, std::move(v), [](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] -= self.grad[i];
  });
}

Var square(const Var& a) {
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] *= v[i];
  return unary(a, std::move(v), [](Node& self) {
    Node& p = *self.parents[0];
    Tensor& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += 2.0 * p.value[i] * self.grad[i];
  });
}

Var vlog(const Var& a) {
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] = std::log(v[i]);
  return unary(a, std::move(v), [](Node& self) {
    Node& p = *self.parents[0];
    Tensor& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += self.grad[i] / p.value[i];
  });
}

Var sigmoid(const Var& a) {
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] = 1.0 / (1.0 + std::exp(-v[i]));
  return unary(a, std::move(v), [](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      real_t y = self.value[i];
      g[i] += self.grad[i] * y * (1.0 - y);
    }
  });
}

Var tanh_op(const Var& a) {
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i) v[i] = std::tanh(v[i]);
  return unary(a, std::move(v), [](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      real_t y = self.value[i];
      g[i] += self.grad[i] * (1.0 - y * y);
    }
  });
}

Var relu(const Var& a) { return leaky_relu(a, 0.0); }

Var leaky_relu(const Var& a, real_t slope) {
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i)
    if (v[i] < 0.0) v[i] *= slope;
  return unary(a, std::move(v), [slope](Node& self) {
    Node& p = *self.parents[0];
    Tensor& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i)
      g[i] += self.grad[i] * (p.value[i] >= 0.0 ? 1.0 : slope);
  });
}

Var clamp(const Var& a, real_t lo, real_t hi) {
  Tensor v = a->value;
  for (std::size_t i = 0; i < v.numel(); ++i)
    v[i] = v[i] < lo ? lo : (v[i] > hi ? hi : v[i]);
  return unary(a, std::move(v), [lo, hi](Node& self) {
    Node& p = *self.parents[0];
    Tensor& g = p.ensure_grad();
    for (std::size_t i = 0; i < g.numel(); ++i) {
      real_t x = p.value[i];
      if (x > lo && x < hi) g[i] += self.grad[i];
    }
  });
}

// ---- reductions ---------------------------------------------------------------

Var mean_all(const Var& a) {
  const real_t inv = 1.0 / static_cast<real_t>(a->value.numel());
  Tensor v = Tensor::scalar(a->value.sum() * inv);
  return unary(a, std::move(v), [inv](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    real_t gs = self.grad[0] * inv;
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gs;
  });
}

Var sum_all(const Var& a) {
  Tensor v = Tensor::scalar(a->value.sum());
  return unary(a, std::move(v), [](Node& self) {
    Tensor& g = self.parents[0]->ensure_grad();
    real_t gs = self.grad[0];
    for (std::size_t i = 0; i < g.numel(); ++i) g[i] += gs;
  });
}

}  // namespace dd
