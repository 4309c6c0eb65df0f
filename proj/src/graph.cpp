#include "gfolio/graph.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <queue>

#include "gfolio/errors.hpp"

namespace gfolio {

CorrField parse_corr_field(const std::string& text) {
  if (text == "close") return CorrField::Close;
  if (text == "log_return") return CorrField::LogReturn;
  throw config_error("corr_field must be 'close' or 'log_return', got '" + text + "'");
}

const char* corr_field_name(CorrField f) {
  return f == CorrField::Close ? "close" : "log_return";
}

Eigen::MatrixXd AssetGraph::scaled_laplacian() const {
  if (!(lambda_max > 1e-12)) {
    throw numeric_error("scaled_laplacian: lambda_max is zero (degenerate graph)");
  }
  const int m = size();
  return 2.0 / lambda_max * sym_laplacian - Eigen::MatrixXd::Identity(m, m);
}

AssetGraph AssetGraph::from_weights(Eigen::MatrixXd weights) {
  const int m = static_cast<int>(weights.rows());
  if (m == 0 || weights.cols() != m) {
    throw shape_error("AssetGraph: weight matrix must be square and non-empty");
  }
  for (int i = 0; i < m; ++i) {
    if (weights(i, i) != 0.0) throw numeric_error("AssetGraph: non-zero diagonal weight");
    for (int j = 0; j < m; ++j) {
      if (weights(i, j) != weights(j, i)) throw numeric_error("AssetGraph: asymmetric weights");
      if (!(weights(i, j) >= 0.0 && weights(i, j) <= 2.0)) {
        throw numeric_error("AssetGraph: weight out of [0, 2] at (" + std::to_string(i) + ", " +
                            std::to_string(j) + ")");
      }
    }
  }

  AssetGraph g;
  g.weights = std::move(weights);
  g.degrees = g.weights.rowwise().sum();
  g.laplacian = Eigen::MatrixXd(g.degrees.asDiagonal()) - g.weights;

  // d^{-1/2} with the pseudo-inverse convention for isolated nodes.
  Eigen::VectorXd dinv_sqrt(m);
  for (int i = 0; i < m; ++i) dinv_sqrt[i] = g.degrees[i] > 0.0 ? 1.0 / std::sqrt(g.degrees[i]) : 0.0;
  g.sym_laplacian = dinv_sqrt.asDiagonal() * g.laplacian * dinv_sqrt.asDiagonal();
  // Exact symmetry for the eigensolver.
  g.sym_laplacian = 0.5 * (g.sym_laplacian + g.sym_laplacian.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(g.sym_laplacian);
  if (solver.info() != Eigen::Success) {
    throw numeric_error("AssetGraph: eigendecomposition failed");
  }
  g.eigenvalues = solver.eigenvalues();
  g.eigenvectors = solver.eigenvectors();
  g.lambda_max = g.eigenvalues[m - 1];
  return g;
}

AssetGraph build_graph(const Panel& panel, int t, int corr_window, CorrField field) {
  const int m = panel.num_assets();
  const int needed = field == CorrField::LogReturn ? corr_window + 1 : corr_window;
  if (corr_window < 3) throw config_error("build_graph: correlation window must be >= 3");
  if (t + 1 < needed || t >= panel.num_days()) {
    throw data_error("build_graph: window of " + std::to_string(corr_window) +
                     " observations does not fit at row " + std::to_string(t));
  }

  // Per-asset observation vectors over [t - corr_window + 1, t].
  Eigen::MatrixXd obs(corr_window, m);
  for (int a = 0; a < m; ++a) {
    for (int j = 0; j < corr_window; ++j) {
      const int row = t - corr_window + 1 + j;
      obs(j, a) = field == CorrField::Close
                      ? panel.close(a, row)
                      : std::log(panel.close(a, row) / panel.close(a, row - 1));
    }
  }

  Eigen::MatrixXd centered = obs.rowwise() - obs.colwise().mean();
  Eigen::VectorXd norms(m);
  for (int a = 0; a < m; ++a) norms[a] = centered.col(a).norm();

  std::vector<std::string> warnings;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a) {
    if (norms[a] == 0.0) {
      warnings.push_back("asset '" + panel.assets()[static_cast<size_t>(a)] +
                         "' has zero variance in the correlation window ending " +
                         panel.date(t).str() + "; using corr = 0");
    }
  }
  for (int a = 0; a < m; ++a) {
    for (int b = a + 1; b < m; ++b) {
      double corr = 0.0;
      if (norms[a] > 0.0 && norms[b] > 0.0) {
        corr = centered.col(a).dot(centered.col(b)) / (norms[a] * norms[b]);
        corr = std::clamp(corr, -1.0, 1.0);
      }
      w(a, b) = w(b, a) = 1.0 - corr;
    }
  }

  AssetGraph g = AssetGraph::from_weights(std::move(w));
  g.warnings = std::move(warnings);
  return g;
}

Eigen::VectorXd graph_fourier(const AssetGraph& graph, const Eigen::VectorXd& x) {
  if (x.size() != graph.size()) {
    throw shape_error("graph_fourier: signal length " + std::to_string(x.size()) +
                      " vs graph size " + std::to_string(graph.size()));
  }
  return graph.eigenvectors.transpose() * x;
}

Eigen::VectorXd inverse_graph_fourier(const AssetGraph& graph, const Eigen::VectorXd& x_hat) {
  if (x_hat.size() != graph.size()) {
    throw shape_error("inverse_graph_fourier: signal length " + std::to_string(x_hat.size()) +
                      " vs graph size " + std::to_string(graph.size()));
  }
  return graph.eigenvectors * x_hat;
}

Eigen::MatrixXd cheb_apply_slab(const Eigen::MatrixXd& scaled_laplacian, const Eigen::MatrixXd& x,
                                const Eigen::VectorXd& theta) {
  const int order = static_cast<int>(theta.size());
  if (order < 1) throw shape_error("cheb_apply: filter order must be >= 1");
  if (scaled_laplacian.rows() != x.rows()) {
    throw shape_error("cheb_apply: signal rows " + std::to_string(x.rows()) +
                      " vs graph size " + std::to_string(scaled_laplacian.rows()));
  }
  // T_0 = x, T_1 = L~ x, T_k = 2 L~ T_{k-1} - T_{k-2}.
  Eigen::MatrixXd prev2 = x;
  Eigen::MatrixXd y = theta[0] * prev2;
  if (order == 1) return y;
  Eigen::MatrixXd prev1 = scaled_laplacian * x;
  y += theta[1] * prev1;
  for (int k = 2; k < order; ++k) {
    Eigen::MatrixXd cur = 2.0 * (scaled_laplacian * prev1) - prev2;
    y += theta[k] * cur;
    prev2 = std::move(prev1);
    prev1 = std::move(cur);
  }
  return y;
}

Eigen::VectorXd cheb_apply(const AssetGraph& graph, const Eigen::VectorXd& x,
                           const Eigen::VectorXd& theta) {
  if (x.size() != graph.size()) {
    throw shape_error("cheb_apply: signal length " + std::to_string(x.size()) +
                      " vs graph size " + std::to_string(graph.size()));
  }
  return cheb_apply_slab(graph.scaled_laplacian(), x, theta);
}

KLocalityReport k_locality_check(const AssetGraph& graph, int order, double weight_threshold,
                                 double tol) {
  if (order < 1) throw shape_error("k_locality_check: order must be >= 1");
  const int m = graph.size();

  // Hop distances on the thresholded graph.
  auto bfs_distances = [&](int source) {
    std::vector<int> dist(static_cast<size_t>(m), -1);
    std::queue<int> q;
    dist[static_cast<size_t>(source)] = 0;
    q.push(source);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int v = 0; v < m; ++v) {
        if (graph.weights(u, v) >= weight_threshold && dist[static_cast<size_t>(v)] < 0) {
          dist[static_cast<size_t>(v)] = dist[static_cast<size_t>(u)] + 1;
          q.push(v);
        }
      }
    }
    return dist;
  };

  // A generic all-ones coefficient vector exercises every polynomial order.
  const Eigen::VectorXd theta = Eigen::VectorXd::Ones(order);
  const Eigen::MatrixXd lt = graph.scaled_laplacian();

  KLocalityReport report;
  for (int i = 0; i < m; ++i) {
    Eigen::VectorXd impulse = Eigen::VectorXd::Zero(m);
    impulse[i] = 1.0;
    const Eigen::VectorXd response = cheb_apply_slab(lt, impulse, theta);
    const auto dist = bfs_distances(i);
    for (int j = 0; j < m; ++j) {
      const bool outside = dist[static_cast<size_t>(j)] < 0 || dist[static_cast<size_t>(j)] > order - 1;
      if (outside) report.max_leakage = std::max(report.max_leakage, std::abs(response[j]));
    }
    ++report.impulses_checked;
  }
  report.ok = report.max_leakage < tol;
  return report;
}

}  // namespace gfolio
