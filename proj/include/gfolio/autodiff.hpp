#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "gfolio/optim.hpp"
#include "gfolio/tensor.hpp"

namespace gfolio::ad {

struct Node;
using NodePtr = std::shared_ptr<Node>;

// One vertex of the reverse-mode tape. A node owns its forward value, a
// lazily allocated gradient of the same shape, and a closure propagating its
// gradient into the parents. Graphs are acyclic by construction (ops only
// reference already-built nodes).
struct Node {
  Tensor value;
  Tensor grad;  // empty until the first accumulation
  std::vector<NodePtr> parents;
  std::function<void()> backprop;
  Param* sink = nullptr;  // set on leaves bound to a parameter
  bool needs_grad = false;

  void accumulate(const Tensor& g);
  const Tensor& grad_or_zeros();
};

// Data entering the graph; never receives a gradient.
NodePtr constant(Tensor value);
NodePtr constant_scalar(double value);

// Learnable leaf; backward() deposits its gradient into p.grad (accumulating,
// so callers zero the store between steps).
NodePtr leaf(Param& p);

// Elementwise arithmetic (operands must share a shape).
NodePtr add(const NodePtr& a, const NodePtr& b);
NodePtr sub(const NodePtr& a, const NodePtr& b);
NodePtr mul(const NodePtr& a, const NodePtr& b);
NodePtr div(const NodePtr& a, const NodePtr& b);
NodePtr neg(const NodePtr& x);
NodePtr add_scalar(const NodePtr& x, double c);
NodePtr mul_scalar(const NodePtr& x, double c);

// Multiply a tensor by a one-entry node; gradient flows to both.
NodePtr scale(const NodePtr& x, const NodePtr& s);
// 1/s for a one-entry node.
NodePtr reciprocal(const NodePtr& s);

// 2-D matrix product [p,q]x[q,r] -> [p,r].
NodePtr matmul(const NodePtr& a, const NodePtr& b);

// Dense layer W*x + b with W [out,in], x [in,batch], b [out] broadcast over
// the batch axis.
NodePtr dense(const NodePtr& weight, const NodePtr& x, const NodePtr& bias);

// Valid-padding convolution sliding a width-k kernel along the last (time)
// axis of x [in,assets,T], independently per asset row.
// kernel [out,in,k], bias [out]; result [out,assets,T-k+1].
NodePtr conv1xk(const NodePtr& x, const NodePtr& kernel, const NodePtr& bias);

NodePtr concat(const NodePtr& a, const NodePtr& b, int axis);
NodePtr slice(const NodePtr& x, int axis, int start, int len);
NodePtr reshape(const NodePtr& x, const Shape& shape);

// Full reductions to a one-entry tensor.
NodePtr sum(const NodePtr& x);
NodePtr mean(const NodePtr& x);

// Activations.
NodePtr tanh(const NodePtr& x);
NodePtr relu(const NodePtr& x);
NodePtr sigmoid(const NodePtr& x);
NodePtr softmax(const NodePtr& x, int axis);

// Elementwise transcendentals (domain x > 0 enforced).
NodePtr log(const NodePtr& x);
NodePtr lgamma(const NodePtr& x);
// Elementwise max(x, c); gradient is zero on the clamped side.
NodePtr clamp_min(const NodePtr& x, double c);

// Reverse sweep from a scalar loss. Touches only subgraphs that require
// gradients; a node reused by several consumers receives the sum of their
// contributions. Parameter gradients accumulate into Param::grad.
void backward(const NodePtr& loss);

}  // namespace gfolio::ad
