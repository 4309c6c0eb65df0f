#include "gfolio/gcn.hpp"

#include <memory>

namespace gfolio {

namespace {

using ad::Node;
using ad::NodePtr;

Eigen::Map<const RowMatrixXd> channel_slab(const Tensor& t, int channel, int m, int cols) {
  return Eigen::Map<const RowMatrixXd>(t.data() + static_cast<Eigen::Index>(channel) * m * cols, m,
                                       cols);
}

Eigen::Map<RowMatrixXd> channel_slab(Tensor& t, int channel, int m, int cols) {
  return Eigen::Map<RowMatrixXd>(t.data() + static_cast<Eigen::Index>(channel) * m * cols, m, cols);
}

void check_gcn_shapes(const Tensor& x, const Tensor& coeffs, const Eigen::MatrixXd& lt) {
  if (x.rank() != 3 || coeffs.rank() != 3) {
    throw shape_error("gcn_apply: expected input [q, m, T] and coefficients [q, p, K], got " +
                      shape_str(x.shape()) + " and " + shape_str(coeffs.shape()));
  }
  if (coeffs.dim(0) != x.dim(0)) {
    throw shape_error("gcn_apply: input channels " + std::to_string(x.dim(0)) +
                      " do not match coefficient tensor " + shape_str(coeffs.shape()));
  }
  if (lt.rows() != x.dim(1) || lt.cols() != x.dim(1)) {
    throw shape_error("gcn_apply: Laplacian " + std::to_string(lt.rows()) + "x" +
                      std::to_string(lt.cols()) + " vs " + std::to_string(x.dim(1)) + " assets");
  }
  if (coeffs.dim(2) < 1) throw shape_error("gcn_apply: filter order must be >= 1");
}

// Chebyshev basis slabs T_k(L~) X for one input channel, k = 0..K-1.
std::vector<RowMatrixXd> cheb_basis(const Eigen::MatrixXd& lt,
                                    const Eigen::Map<const RowMatrixXd>& x, int order) {
  std::vector<RowMatrixXd> basis;
  basis.reserve(static_cast<size_t>(order));
  basis.emplace_back(x);
  if (order > 1) basis.emplace_back(lt * x);
  for (int k = 2; k < order; ++k) {
    basis.emplace_back(2.0 * (lt * basis[static_cast<size_t>(k - 1)]) -
                       basis[static_cast<size_t>(k - 2)]);
  }
  return basis;
}

Tensor gcn_forward(const Tensor& x, const Tensor& coeffs, const Eigen::MatrixXd& lt,
                   std::vector<std::vector<RowMatrixXd>>* keep_basis) {
  const int q = x.dim(0), m = x.dim(1), cols = x.dim(2);
  const int p = coeffs.dim(1), order = coeffs.dim(2);

  Tensor out = Tensor::zeros({p, m, cols});
  std::vector<std::vector<RowMatrixXd>> all_basis;
  all_basis.reserve(static_cast<size_t>(q));
  for (int in = 0; in < q; ++in) {
    all_basis.push_back(cheb_basis(lt, channel_slab(x, in, m, cols), order));
  }
  for (int o = 0; o < p; ++o) {
    auto slab = channel_slab(out, o, m, cols);
    for (int in = 0; in < q; ++in) {
      for (int k = 0; k < order; ++k) {
        slab += coeffs[(in * p + o) * order + k] * all_basis[static_cast<size_t>(in)][static_cast<size_t>(k)];
      }
    }
  }
  out.ensure_finite("gcn_apply");
  if (keep_basis) *keep_basis = std::move(all_basis);
  return out;
}

}  // namespace

void ChebFilterBank::check(const Tensor& coeffs) const {
  if (coeffs.shape() != coeff_shape()) {
    throw shape_error("ChebFilterBank: coefficients " + shape_str(coeffs.shape()) +
                      " do not match bank " + shape_str(coeff_shape()));
  }
  if (order < 1) throw shape_error("ChebFilterBank: order must be >= 1");
}

ad::NodePtr gcn_apply(const ad::NodePtr& x, const ad::NodePtr& coeffs,
                      const Eigen::MatrixXd& scaled_laplacian) {
  check_gcn_shapes(x->value, coeffs->value, scaled_laplacian);
  const int q = x->value.dim(0), m = x->value.dim(1), cols = x->value.dim(2);
  const int p = coeffs->value.dim(1), order = coeffs->value.dim(2);

  auto basis = std::make_shared<std::vector<std::vector<RowMatrixXd>>>();
  Tensor out = gcn_forward(x->value, coeffs->value, scaled_laplacian, basis.get());

  auto n = std::make_shared<Node>();
  n->value = std::move(out);
  n->parents = {x, coeffs};
  n->needs_grad = x->needs_grad || coeffs->needs_grad;
  Node* self = n.get();
  Node* px = x.get();
  Node* pc = coeffs.get();
  Eigen::MatrixXd lt = scaled_laplacian;
  n->backprop = [self, px, pc, basis, lt, q, m, cols, p, order]() {
    const Tensor& g = self->grad;
    if (pc->needs_grad) {
      Tensor dc = Tensor::zeros({q, p, order});
      for (int in = 0; in < q; ++in) {
        for (int o = 0; o < p; ++o) {
          const auto gs = channel_slab(g, o, m, cols);
          for (int k = 0; k < order; ++k) {
            dc[(in * p + o) * order + k] =
                ((*basis)[static_cast<size_t>(in)][static_cast<size_t>(k)].array() * gs.array())
                    .sum();
          }
        }
      }
      pc->accumulate(dc);
    }
    if (px->needs_grad) {
      // d/dx of sum_k theta_k T_k(L~) x is the same symmetric filter, so the
      // input gradient is the filter applied to the output gradient.
      Tensor dx = Tensor::zeros({q, m, cols});
      for (int in = 0; in < q; ++in) {
        auto slab = channel_slab(dx, in, m, cols);
        for (int o = 0; o < p; ++o) {
          Eigen::VectorXd theta(order);
          for (int k = 0; k < order; ++k) theta[k] = pc->value[(in * p + o) * order + k];
          slab += cheb_apply_slab(lt, channel_slab(g, o, m, cols), theta);
        }
      }
      px->accumulate(dx);
    }
  };
  return n;
}

ad::NodePtr gcn_layer(const ad::NodePtr& x, const ad::NodePtr& coeffs, const AssetGraph& graph) {
  return ad::sigmoid(gcn_apply(x, coeffs, graph.scaled_laplacian()));
}

Tensor gcn_layer_eval(const Tensor& x, const Tensor& coeffs,
                      const Eigen::MatrixXd& scaled_laplacian) {
  check_gcn_shapes(x, coeffs, scaled_laplacian);
  return sigmoid(gcn_forward(x, coeffs, scaled_laplacian, nullptr));
}

}  // namespace gfolio
