#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "gfolio/panel.hpp"

namespace gfolio {

// Which per-asset stream feeds the pairwise correlation.
enum class CorrField { Close, LogReturn };

CorrField parse_corr_field(const std::string& text);
const char* corr_field_name(CorrField f);

// Correlation graph over the portfolio assets, with both Laplacians and the
// eigendecomposition of the symmetric one cached. Weights follow
// w_ij = 1 - corr(i, j), zero diagonal, so entries lie in [0, 2].
struct AssetGraph {
  Eigen::MatrixXd weights;         // W, symmetric, zero diagonal
  Eigen::VectorXd degrees;         // d_i = sum_j w_ij
  Eigen::MatrixXd laplacian;       // L = D - W
  Eigen::MatrixXd sym_laplacian;   // D^{-1/2} (D - W) D^{-1/2}
  Eigen::VectorXd eigenvalues;     // of the symmetric Laplacian, ascending
  Eigen::MatrixXd eigenvectors;    // orthonormal columns
  double lambda_max = 0;
  std::vector<std::string> warnings;  // zero-variance substitutions etc.

  int size() const { return static_cast<int>(weights.rows()); }

  // Rescaled Laplacian 2 L_sym / lambda_max - I; errors when the spectrum is
  // degenerate (lambda_max ~ 0).
  Eigen::MatrixXd scaled_laplacian() const;

  // Builds every derived field from a weight matrix (validated: square,
  // symmetric, zero diagonal, entries in [0, 2]).
  static AssetGraph from_weights(Eigen::MatrixXd weights);
};

// Pearson correlation graph over the window [t - corr_window + 1, t] of the
// chosen field. A zero-variance asset contributes correlation 0 (weight 1)
// and a warning record.
AssetGraph build_graph(const Panel& panel, int t, int corr_window,
                       CorrField field = CorrField::Close);

// Graph Fourier transform and inverse: projection on/off the eigenbasis.
Eigen::VectorXd graph_fourier(const AssetGraph& graph, const Eigen::VectorXd& x);
Eigen::VectorXd inverse_graph_fourier(const AssetGraph& graph, const Eigen::VectorXd& x_hat);

// Chebyshev recurrence over the scaled Laplacian applied to the columns of
// x: sum_k theta_k T_k(L~) x, in O(K) matrix products and never through the
// dense spectral form. Works on a single signal (m) or a slab (m x T).
Eigen::MatrixXd cheb_apply_slab(const Eigen::MatrixXd& scaled_laplacian, const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& theta);
Eigen::VectorXd cheb_apply(const AssetGraph& graph, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& theta);

// Verifies that an order-K filter's impulse responses vanish outside the
// (K-1)-hop ball of the graph thresholded at `weight_threshold`. Only this
// diagnostic thresholds; the spectral path always uses the full weights.
struct KLocalityReport {
  bool ok = true;
  double max_leakage = 0;  // largest |response| beyond the ball
  int impulses_checked = 0;
};
KLocalityReport k_locality_check(const AssetGraph& graph, int order,
                                 double weight_threshold = 1e-12, double tol = 1e-9);

}  // namespace gfolio
