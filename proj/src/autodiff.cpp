#include "gfolio/autodiff.hpp"

#include <cmath>
#include <unordered_set>

namespace gfolio::ad {

namespace {

NodePtr make_node(Tensor value, std::vector<NodePtr> parents) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->parents = std::move(parents);
  for (const auto& p : n->parents) {
    if (p->needs_grad) {
      n->needs_grad = true;
      break;
    }
  }
  return n;
}

void check_axis(const NodePtr& x, int axis, const char* op) {
  if (axis < 0 || axis >= x->value.rank()) {
    throw shape_error(std::string(op) + ": axis " + std::to_string(axis) +
                      " out of range for shape " + shape_str(x->value.shape()));
  }
}

// outer*len*inner decomposition of a shape around one axis.
struct AxisSplit {
  Eigen::Index outer = 1, len = 1, inner = 1;
};

AxisSplit split_shape(const Shape& s, int axis) {
  AxisSplit sp;
  for (int i = 0; i < axis; ++i) sp.outer *= s[static_cast<size_t>(i)];
  sp.len = s[static_cast<size_t>(axis)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < s.size(); ++i) sp.inner *= s[i];
  return sp;
}

}  // namespace

void Node::accumulate(const Tensor& g) {
  check_same_shape(value, g, "Node::accumulate");
  if (grad.empty()) {
    grad = g;
  } else {
    grad.array() += g.array();
  }
}

const Tensor& Node::grad_or_zeros() {
  if (grad.empty()) grad = Tensor::zeros(value.shape());
  return grad;
}

NodePtr constant(Tensor value) { return make_node(std::move(value), {}); }

NodePtr constant_scalar(double value) { return constant(Tensor::scalar(value)); }

NodePtr leaf(Param& p) {
  auto n = make_node(p.value, {});
  n->needs_grad = true;
  n->sink = &p;
  Node* self = n.get();
  Param* param = &p;
  n->backprop = [self, param]() { param->grad.array() += self->grad.array(); };
  return n;
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a->value, b->value, "add");
  auto n = make_node(Tensor(a->value.shape(), a->value.array() + b->value.array()), {a, b});
  Node* self = n.get();
  Node *pa = a.get(), *pb = b.get();
  n->backprop = [self, pa, pb]() {
    pa->accumulate(self->grad);
    pb->accumulate(self->grad);
  };
  return n;
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a->value, b->value, "sub");
  auto n = make_node(Tensor(a->value.shape(), a->value.array() - b->value.array()), {a, b});
  Node* self = n.get();
  Node *pa = a.get(), *pb = b.get();
  n->backprop = [self, pa, pb]() {
    pa->accumulate(self->grad);
    pb->accumulate(Tensor(self->grad.shape(), -self->grad.array()));
  };
  return n;
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a->value, b->value, "mul");
  auto n = make_node(Tensor(a->value.shape(), a->value.array() * b->value.array()), {a, b});
  Node* self = n.get();
  Node *pa = a.get(), *pb = b.get();
  n->backprop = [self, pa, pb]() {
    pa->accumulate(Tensor(self->grad.shape(), self->grad.array() * pb->value.array()));
    pb->accumulate(Tensor(self->grad.shape(), self->grad.array() * pa->value.array()));
  };
  return n;
}

NodePtr div(const NodePtr& a, const NodePtr& b) {
  check_same_shape(a->value, b->value, "div");
  auto n = make_node(Tensor(a->value.shape(), a->value.array() / b->value.array()), {a, b});
  Node* self = n.get();
  Node *pa = a.get(), *pb = b.get();
  n->backprop = [self, pa, pb]() {
    pa->accumulate(Tensor(self->grad.shape(), self->grad.array() / pb->value.array()));
    pb->accumulate(Tensor(self->grad.shape(), -self->grad.array() * pa->value.array() /
                                                  pb->value.array().square()));
  };
  return n;
}

NodePtr neg(const NodePtr& x) { return mul_scalar(x, -1.0); }

NodePtr add_scalar(const NodePtr& x, double c) {
  auto n = make_node(Tensor(x->value.shape(), x->value.array() + c), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px]() { px->accumulate(self->grad); };
  return n;
}

NodePtr mul_scalar(const NodePtr& x, double c) {
  auto n = make_node(Tensor(x->value.shape(), x->value.array() * c), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px, c]() {
    px->accumulate(Tensor(self->grad.shape(), self->grad.array() * c));
  };
  return n;
}

NodePtr scale(const NodePtr& x, const NodePtr& s) {
  if (s->value.size() != 1) {
    throw shape_error("scale: scale factor must hold one entry, got shape " +
                      shape_str(s->value.shape()));
  }
  const double sv = s->value[0];
  auto n = make_node(Tensor(x->value.shape(), x->value.array() * sv), {x, s});
  Node* self = n.get();
  Node *px = x.get(), *ps = s.get();
  n->backprop = [self, px, ps, sv]() {
    px->accumulate(Tensor(self->grad.shape(), self->grad.array() * sv));
    ps->accumulate(Tensor::scalar((self->grad.array() * px->value.array()).sum()));
  };
  return n;
}

NodePtr reciprocal(const NodePtr& s) {
  if (s->value.size() != 1) {
    throw shape_error("reciprocal: expected one entry, got shape " + shape_str(s->value.shape()));
  }
  const double v = 1.0 / s->value[0];
  auto n = make_node(Tensor::scalar(v), {s});
  Node* self = n.get();
  Node* ps = s.get();
  n->backprop = [self, ps, v]() { ps->accumulate(Tensor::scalar(-self->grad[0] * v * v)); };
  return n;
}

NodePtr matmul(const NodePtr& a, const NodePtr& b) {
  if (a->value.rank() != 2 || b->value.rank() != 2 || a->value.dim(1) != b->value.dim(0)) {
    throw shape_error("matmul: incompatible shapes " + shape_str(a->value.shape()) + " vs " +
                      shape_str(b->value.shape()));
  }
  const int p = a->value.dim(0), q = a->value.dim(1), r = b->value.dim(1);
  Tensor out = Tensor::zeros({p, r});
  out.as_matrix(p, r) = a->value.as_matrix(p, q) * b->value.as_matrix(q, r);
  out.ensure_finite("matmul");
  auto n = make_node(std::move(out), {a, b});
  Node* self = n.get();
  Node *pa = a.get(), *pb = b.get();
  n->backprop = [self, pa, pb, p, q, r]() {
    auto g = self->grad.as_matrix(p, r);
    Tensor da = Tensor::zeros({p, q});
    da.as_matrix(p, q) = g * pb->value.as_matrix(q, r).transpose();
    pa->accumulate(da);
    Tensor db = Tensor::zeros({q, r});
    db.as_matrix(q, r) = pa->value.as_matrix(p, q).transpose() * g;
    pb->accumulate(db);
  };
  return n;
}

NodePtr dense(const NodePtr& weight, const NodePtr& x, const NodePtr& bias) {
  if (weight->value.rank() != 2 || x->value.rank() != 2 || bias->value.rank() != 1 ||
      weight->value.dim(1) != x->value.dim(0) || bias->value.dim(0) != weight->value.dim(0)) {
    throw shape_error("dense: incompatible shapes W " + shape_str(weight->value.shape()) + ", x " +
                      shape_str(x->value.shape()) + ", b " + shape_str(bias->value.shape()));
  }
  const int out = weight->value.dim(0), in = weight->value.dim(1), batch = x->value.dim(1);
  Tensor y = Tensor::zeros({out, batch});
  y.as_matrix(out, batch) =
      (weight->value.as_matrix(out, in) * x->value.as_matrix(in, batch)).colwise() +
      Eigen::Map<const Eigen::VectorXd>(bias->value.data(), out);
  y.ensure_finite("dense");
  auto n = make_node(std::move(y), {weight, x, bias});
  Node* self = n.get();
  Node *pw = weight.get(), *px = x.get(), *pb = bias.get();
  n->backprop = [self, pw, px, pb, out, in, batch]() {
    auto g = self->grad.as_matrix(out, batch);
    Tensor dw = Tensor::zeros({out, in});
    dw.as_matrix(out, in) = g * px->value.as_matrix(in, batch).transpose();
    pw->accumulate(dw);
    Tensor dx = Tensor::zeros({in, batch});
    dx.as_matrix(in, batch) = pw->value.as_matrix(out, in).transpose() * g;
    px->accumulate(dx);
    Tensor db = Tensor::zeros({out});
    Eigen::Map<Eigen::VectorXd>(db.data(), out) = g.rowwise().sum();
    pb->accumulate(db);
  };
  return n;
}

NodePtr conv1xk(const NodePtr& x, const NodePtr& kernel, const NodePtr& bias) {
  if (x->value.rank() != 3 || kernel->value.rank() != 3 || bias->value.rank() != 1) {
    throw shape_error("conv1xk: expected input rank 3, kernel rank 3, bias rank 1; got " +
                      shape_str(x->value.shape()) + ", " + shape_str(kernel->value.shape()) +
                      ", " + shape_str(bias->value.shape()));
  }
  const int cin = x->value.dim(0), assets = x->value.dim(1), t = x->value.dim(2);
  const int cout = kernel->value.dim(0), kcin = kernel->value.dim(1), k = kernel->value.dim(2);
  if (kcin != cin || bias->value.dim(0) != cout) {
    throw shape_error("conv1xk: kernel " + shape_str(kernel->value.shape()) +
                      " does not match input " + shape_str(x->value.shape()));
  }
  if (k > t) {
    throw shape_error("conv1xk: kernel width " + std::to_string(k) +
                      " exceeds time axis of input " + shape_str(x->value.shape()));
  }
  const int tout = t - k + 1;
  Tensor y = Tensor::zeros({cout, assets, tout});
  const double* xd = x->value.data();
  const double* kd = kernel->value.data();
  const double* bd = bias->value.data();
  double* yd = y.data();
  for (int o = 0; o < cout; ++o) {
    for (int a = 0; a < assets; ++a) {
      for (int u = 0; u < tout; ++u) {
        double acc = bd[o];
        for (int i = 0; i < cin; ++i) {
          for (int j = 0; j < k; ++j) {
            acc += kd[(o * cin + i) * k + j] * xd[(i * assets + a) * t + u + j];
          }
        }
        yd[(o * assets + a) * tout + u] = acc;
      }
    }
  }
  y.ensure_finite("conv1xk");
  auto n = make_node(std::move(y), {x, kernel, bias});
  Node* self = n.get();
  Node *px = x.get(), *pk = kernel.get(), *pb = bias.get();
  n->backprop = [self, px, pk, pb, cin, assets, t, cout, k, tout]() {
    const double* g = self->grad.data();
    const double* xd = px->value.data();
    const double* kd = pk->value.data();
    Tensor dx = Tensor::zeros({cin, assets, t});
    Tensor dk = Tensor::zeros({cout, cin, k});
    Tensor db = Tensor::zeros({cout});
    for (int o = 0; o < cout; ++o) {
      for (int a = 0; a < assets; ++a) {
        for (int u = 0; u < tout; ++u) {
          const double gv = g[(o * assets + a) * tout + u];
          db[o] += gv;
          for (int i = 0; i < cin; ++i) {
            for (int j = 0; j < k; ++j) {
              dk[(o * cin + i) * k + j] += gv * xd[(i * assets + a) * t + u + j];
              dx[(i * assets + a) * t + u + j] += gv * kd[(o * cin + i) * k + j];
            }
          }
        }
      }
    }
    px->accumulate(dx);
    pk->accumulate(dk);
    pb->accumulate(db);
  };
  return n;
}

NodePtr concat(const NodePtr& a, const NodePtr& b, int axis) {
  check_axis(a, axis, "concat");
  if (a->value.rank() != b->value.rank()) {
    throw shape_error("concat: rank mismatch " + shape_str(a->value.shape()) + " vs " +
                      shape_str(b->value.shape()));
  }
  for (int i = 0; i < a->value.rank(); ++i) {
    if (i != axis && a->value.dim(i) != b->value.dim(i)) {
      throw shape_error("concat: shapes " + shape_str(a->value.shape()) + " and " +
                        shape_str(b->value.shape()) + " differ off the concat axis");
    }
  }
  Shape out_shape = a->value.shape();
  out_shape[static_cast<size_t>(axis)] += b->value.dim(axis);
  const auto sa = split_shape(a->value.shape(), axis);
  const auto sb = split_shape(b->value.shape(), axis);
  Tensor out = Tensor::zeros(out_shape);
  const Eigen::Index block_a = sa.len * sa.inner, block_b = sb.len * sb.inner;
  for (Eigen::Index o = 0; o < sa.outer; ++o) {
    for (Eigen::Index i = 0; i < block_a; ++i) out[o * (block_a + block_b) + i] = a->value[o * block_a + i];
    for (Eigen::Index i = 0; i < block_b; ++i)
      out[o * (block_a + block_b) + block_a + i] = b->value[o * block_b + i];
  }
  auto n = make_node(std::move(out), {a, b});
  Node* self = n.get();
  Node *pa = a.get(), *pb = b.get();
  n->backprop = [self, pa, pb, sa, block_a, block_b]() {
    Tensor da = Tensor::zeros(pa->value.shape());
    Tensor db = Tensor::zeros(pb->value.shape());
    for (Eigen::Index o = 0; o < sa.outer; ++o) {
      for (Eigen::Index i = 0; i < block_a; ++i) da[o * block_a + i] = self->grad[o * (block_a + block_b) + i];
      for (Eigen::Index i = 0; i < block_b; ++i)
        db[o * block_b + i] = self->grad[o * (block_a + block_b) + block_a + i];
    }
    pa->accumulate(da);
    pb->accumulate(db);
  };
  return n;
}

NodePtr slice(const NodePtr& x, int axis, int start, int len) {
  check_axis(x, axis, "slice");
  if (start < 0 || len <= 0 || start + len > x->value.dim(axis)) {
    throw shape_error("slice: range [" + std::to_string(start) + ", " + std::to_string(start + len) +
                      ") out of bounds on axis " + std::to_string(axis) + " of " +
                      shape_str(x->value.shape()));
  }
  Shape out_shape = x->value.shape();
  out_shape[static_cast<size_t>(axis)] = len;
  const auto sp = split_shape(x->value.shape(), axis);
  Tensor out = Tensor::zeros(out_shape);
  for (Eigen::Index o = 0; o < sp.outer; ++o) {
    for (Eigen::Index j = 0; j < len; ++j) {
      for (Eigen::Index i = 0; i < sp.inner; ++i) {
        out[(o * len + j) * sp.inner + i] = x->value[(o * sp.len + start + j) * sp.inner + i];
      }
    }
  }
  auto n = make_node(std::move(out), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px, sp, start, len]() {
    Tensor dx = Tensor::zeros(px->value.shape());
    for (Eigen::Index o = 0; o < sp.outer; ++o) {
      for (Eigen::Index j = 0; j < len; ++j) {
        for (Eigen::Index i = 0; i < sp.inner; ++i) {
          dx[(o * sp.len + start + j) * sp.inner + i] = self->grad[(o * len + j) * sp.inner + i];
        }
      }
    }
    px->accumulate(dx);
  };
  return n;
}

NodePtr reshape(const NodePtr& x, const Shape& shape) {
  Tensor out(shape, x->value.array());
  auto n = make_node(std::move(out), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px]() { px->accumulate(Tensor(px->value.shape(), self->grad.array())); };
  return n;
}

NodePtr sum(const NodePtr& x) {
  auto n = make_node(Tensor::scalar(x->value.array().sum()), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px]() { px->accumulate(Tensor::full(px->value.shape(), self->grad[0])); };
  return n;
}

NodePtr mean(const NodePtr& x) {
  const double inv = 1.0 / static_cast<double>(x->value.size());
  auto n = make_node(Tensor::scalar(x->value.array().sum() * inv), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px, inv]() {
    px->accumulate(Tensor::full(px->value.shape(), self->grad[0] * inv));
  };
  return n;
}

NodePtr tanh(const NodePtr& x) {
  auto n = make_node(gfolio::tanh(x->value), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px]() {
    px->accumulate(
        Tensor(self->grad.shape(), self->grad.array() * (1.0 - self->value.array().square())));
  };
  return n;
}

NodePtr relu(const NodePtr& x) {
  auto n = make_node(gfolio::relu(x->value), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px]() {
    px->accumulate(Tensor(self->grad.shape(),
                          self->grad.array() * (px->value.array() > 0.0).cast<double>()));
  };
  return n;
}

NodePtr sigmoid(const NodePtr& x) {
  auto n = make_node(gfolio::sigmoid(x->value), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px]() {
    const auto& y = self->value.array();
    px->accumulate(Tensor(self->grad.shape(), self->grad.array() * y * (1.0 - y)));
  };
  return n;
}

NodePtr softmax(const NodePtr& x, int axis) {
  check_axis(x, axis, "softmax");
  auto n = make_node(gfolio::softmax(x->value, axis), {x});
  Node* self = n.get();
  Node* px = x.get();
  const auto sp = split_shape(x->value.shape(), axis);
  n->backprop = [self, px, sp]() {
    Tensor dx = Tensor::zeros(px->value.shape());
    for (Eigen::Index o = 0; o < sp.outer; ++o) {
      for (Eigen::Index i = 0; i < sp.inner; ++i) {
        double dot = 0.0;
        for (Eigen::Index j = 0; j < sp.len; ++j) {
          const Eigen::Index idx = (o * sp.len + j) * sp.inner + i;
          dot += self->grad[idx] * self->value[idx];
        }
        for (Eigen::Index j = 0; j < sp.len; ++j) {
          const Eigen::Index idx = (o * sp.len + j) * sp.inner + i;
          dx[idx] = self->value[idx] * (self->grad[idx] - dot);
        }
      }
    }
    px->accumulate(dx);
  };
  return n;
}

NodePtr log(const NodePtr& x) {
  if (!(x->value.array() > 0.0).all()) {
    throw numeric_error("log: input must be strictly positive");
  }
  auto n = make_node(Tensor(x->value.shape(), x->value.array().log()), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px]() {
    px->accumulate(Tensor(self->grad.shape(), self->grad.array() / px->value.array()));
  };
  return n;
}

NodePtr lgamma(const NodePtr& x) {
  if (!(x->value.array() > 0.0).all()) {
    throw numeric_error("lgamma: input must be strictly positive");
  }
  Eigen::ArrayXd out(x->value.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = std::lgamma(x->value[i]);
  auto n = make_node(Tensor(x->value.shape(), std::move(out)), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px]() {
    Eigen::ArrayXd d(px->value.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = digamma(px->value[i]);
    px->accumulate(Tensor(self->grad.shape(), self->grad.array() * d));
  };
  return n;
}

NodePtr clamp_min(const NodePtr& x, double c) {
  auto n = make_node(Tensor(x->value.shape(), x->value.array().max(c)), {x});
  Node* self = n.get();
  Node* px = x.get();
  n->backprop = [self, px, c]() {
    px->accumulate(Tensor(self->grad.shape(),
                          self->grad.array() * (px->value.array() > c).cast<double>()));
  };
  return n;
}

void backward(const NodePtr& loss) {
  if (!loss) throw shape_error("backward: null loss node");
  if (loss->value.size() != 1) {
    throw shape_error("backward: loss must hold a single entry, got shape " +
                      shape_str(loss->value.shape()));
  }
  if (!loss->needs_grad) return;  // no parameters reachable

  // Iterative post-order DFS over the gradient-bearing subgraph.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, size_t>> stack;
  stack.emplace_back(loss.get(), 0);
  visited.insert(loss.get());
  while (!stack.empty()) {
    auto [n, i] = stack.back();
    if (i < n->parents.size()) {
      stack.back().second += 1;
      Node* p = n->parents[i].get();
      if (p->needs_grad && !visited.count(p)) {
        visited.insert(p);
        stack.emplace_back(p, 0);
      }
    } else {
      order.push_back(n);
      stack.pop_back();
    }
  }

  loss->accumulate(Tensor::scalar(1.0));
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backprop && !n->grad.empty()) n->backprop();
  }
}

}  // namespace gfolio::ad
