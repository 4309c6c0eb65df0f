#pragma once

#include "gfolio/autodiff.hpp"
#include "gfolio/graph.hpp"
#include "gfolio/tensor.hpp"

namespace gfolio {

// Chebyshev filter coefficients for one graph-convolution layer: a length-K
// vector per (input channel, output channel) pair, stored as one tensor
// [in, out, K].
struct ChebFilterBank {
  int in_channels = 0;
  int out_channels = 0;
  int order = 0;

  Shape coeff_shape() const { return {in_channels, out_channels, order}; }
  void check(const Tensor& coeffs) const;
};

// Pre-activation graph convolution on a latent slab x [q, m, T]:
// out[o, :, t] = sum_in cheb(x[in, :, t], theta[in, o, :]). Differentiable
// in both the coefficients and the input. The Laplacian enters rescaled and
// fixed (graphs rebuild per day; they carry no parameters).
ad::NodePtr gcn_apply(const ad::NodePtr& x, const ad::NodePtr& coeffs,
                      const Eigen::MatrixXd& scaled_laplacian);

// Full layer: sigmoid(gcn_apply(...)).
ad::NodePtr gcn_layer(const ad::NodePtr& x, const ad::NodePtr& coeffs, const AssetGraph& graph);

// Evaluation-mode layer on plain tensors (no tape).
Tensor gcn_layer_eval(const Tensor& x, const Tensor& coeffs,
                      const Eigen::MatrixXd& scaled_laplacian);

}  // namespace gfolio
