#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "gfolio/autodiff.hpp"
#include "gfolio/gcn.hpp"
#include "gfolio/graph.hpp"
#include "gfolio/rng.hpp"
#include "gfolio/synth.hpp"
#include "testutil.hpp"

using namespace gfolio;

namespace {

Panel synthetic_panel(int assets, int days, double vol, uint64_t seed, double corr = 0.2) {
  Rng rng(seed);
  SynthSpec spec;
  spec.assets = assets;
  spec.days = days;
  spec.volatility = vol;
  spec.correlation = corr;
  return Panel(generate_synthetic_market(spec, rng), IndicatorParams{});
}

// Dense spectral route: Phi diag(sum_k theta_k T_k(lambda~)) Phi^T x.
Eigen::VectorXd dense_spectral_oracle(const AssetGraph& g, const Eigen::VectorXd& x,
                                      const Eigen::VectorXd& theta) {
  const int m = g.size();
  Eigen::VectorXd filtered = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i) {
    const double lam = 2.0 * g.eigenvalues[i] / g.lambda_max - 1.0;
    // Scalar Chebyshev values on the rescaled eigenvalues; still a separate
    // route from the matrix recurrence under test.
    double tk_prev = 1.0, tk = lam, acc = theta[0];
    if (theta.size() > 1) acc += theta[1] * lam;
    for (int k = 2; k < theta.size(); ++k) {
      const double tk_next = 2.0 * lam * tk - tk_prev;
      acc += theta[k] * tk_next;
      tk_prev = tk;
      tk = tk_next;
    }
    filtered[i] = acc;
  }
  return g.eigenvectors * filtered.asDiagonal() * g.eigenvectors.transpose() * x;
}

}  // namespace

TEST_CASE("build_graph: perfect correlation and anti-correlation weights") {
  // Two identical series -> corr 1 -> weight 0; a series and its mirror ->
  // corr -1 -> weight 2.
  OhlcvSeries up, down, up2;
  Date d{2021, 1, 1};
  for (int t = 0; t < 60; ++t) {
    auto mk = [&](double close) {
      OhlcvBar bar;
      bar.date = d;
      bar.open = close * 0.999;
      bar.close = close;
      bar.high = close * 1.002;
      bar.low = close * 0.997;
      bar.volume = 1000;
      return bar;
    };
    up.rows.push_back(mk(100.0 + t));
    up2.rows.push_back(mk(200.0 + 2.0 * t));  // affine image: corr exactly 1
    down.rows.push_back(mk(200.0 - t));       // mirror: corr exactly -1
    d.day += 1;
    if (!is_valid_date(d.year, d.month, d.day)) {
      d.day = 1;
      d.month += 1;
    }
  }
  up.asset_id = "up";
  up2.asset_id = "up2";
  down.asset_id = "down";
  const Panel panel({up, up2, down}, IndicatorParams{});

  const AssetGraph g = build_graph(panel, panel.num_days() - 1, 10);
  CHECK(g.weights(0, 1) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(g.weights(0, 2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.weights(1, 2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(g.warnings.empty());
}

TEST_CASE("build_graph: weights match an independent correlation oracle") {
  const Panel panel = synthetic_panel(3, 80, 0.02, 4242);
  const int t = panel.num_days() - 1;
  const int w = 10;
  const AssetGraph g = build_graph(panel, t, w);

  // Direct covariance/correlation computation.
  for (int a = 0; a < 3; ++a) {
    for (int b = 0; b < 3; ++b) {
      if (a == b) {
        CHECK(g.weights(a, b) == 0.0);
        continue;
      }
      double ma = 0, mb = 0;
      for (int j = 0; j < w; ++j) {
        ma += panel.close(a, t - w + 1 + j);
        mb += panel.close(b, t - w + 1 + j);
      }
      ma /= w;
      mb /= w;
      double cab = 0, ca = 0, cb = 0;
      for (int j = 0; j < w; ++j) {
        const double da = panel.close(a, t - w + 1 + j) - ma;
        const double db = panel.close(b, t - w + 1 + j) - mb;
        cab += da * db;
        ca += da * da;
        cb += db * db;
      }
      const double corr = cab / std::sqrt(ca * cb);
      CHECK(g.weights(a, b) == doctest::Approx(1.0 - corr).epsilon(1e-12));
    }
  }
}

TEST_CASE("build_graph: zero-variance asset gets weight 1 and a warning") {
  OhlcvSeries flat, moving;
  Date d{2021, 1, 1};
  Rng rng(7);
  for (int t = 0; t < 60; ++t) {
    OhlcvBar f;
    f.date = d;
    f.open = f.high = f.low = f.close = 42.0;
    f.volume = 10;
    flat.rows.push_back(f);
    OhlcvBar mv;
    mv.close = 100.0 * std::exp(0.01 * rng.normal());
    mv.date = d;
    mv.open = mv.close * 0.999;
    mv.high = mv.close * 1.01;
    mv.low = mv.open * 0.99;
    mv.volume = 10;
    moving.rows.push_back(mv);
    d.day += 1;
    if (!is_valid_date(d.year, d.month, d.day)) {
      d.day = 1;
      d.month += 1;
    }
  }
  flat.asset_id = "flat";
  moving.asset_id = "moving";
  const Panel panel({flat, moving}, IndicatorParams{});
  const AssetGraph g = build_graph(panel, panel.num_days() - 1, 10);
  CHECK(g.weights(0, 1) == 1.0);
  REQUIRE(g.warnings.size() == 1);
  CHECK(g.warnings[0].find("flat") != std::string::npos);
}

TEST_CASE("asset graph: Laplacian invariants on random graphs") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_int(0, 10));
    const AssetGraph g = AssetGraph::from_weights(testutil::random_weights(m, rng, 0.2));

    // Combinatorial Laplacian rows sum to zero.
    CHECK(g.laplacian.rowwise().sum().cwiseAbs().maxCoeff() < 1e-9);
    // Orthonormal eigenvectors.
    const Eigen::MatrixXd gram =
        g.eigenvectors.transpose() * g.eigenvectors - Eigen::MatrixXd::Identity(m, m);
    CHECK(gram.cwiseAbs().maxCoeff() < 1e-9);
    // Symmetric Laplacian spectrum within [0, 2].
    CHECK(g.eigenvalues.minCoeff() > -1e-9);
    CHECK(g.eigenvalues.maxCoeff() < 2.0 + 1e-9);
    // L_sym symmetric.
    CHECK((g.sym_laplacian - g.sym_laplacian.transpose()).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("asset graph: connected graphs have a near-zero smallest eigenvalue") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 3 + static_cast<int>(rng.uniform_int(0, 7));
    // Dense positive weights: connected by construction.
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) w(i, j) = w(j, i) = rng.uniform(0.1, 2.0);
    }
    const AssetGraph g = AssetGraph::from_weights(w);
    CHECK(std::abs(g.eigenvalues[0]) < 1e-9);
  }
}

TEST_CASE("graph Fourier: eigenvector maps to a unit coordinate, round trip, Parseval") {
  Rng rng(55);
  const AssetGraph g = AssetGraph::from_weights(testutil::random_weights(7, rng));

  // Phi column k transforms to e_k, up to the eigenvector sign convention.
  const Eigen::VectorXd xk = g.eigenvectors.col(3);
  const Eigen::VectorXd xk_hat = graph_fourier(g, xk);
  for (int i = 0; i < 7; ++i) {
    CHECK(xk_hat[i] == doctest::Approx(i == 3 ? 1.0 : 0.0).epsilon(1e-9));
  }

  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = testutil::random_vector(7, rng);
    const Eigen::VectorXd back = inverse_graph_fourier(g, graph_fourier(g, x));
    CHECK((back - x).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(graph_fourier(g, x).norm() == doctest::Approx(x.norm()).epsilon(1e-9));
  }

  CHECK_THROWS_AS(static_cast<void>(graph_fourier(g, Eigen::VectorXd::Zero(5))), shape_error);
}

TEST_CASE("cheb_apply: order-1 and order-2 filters reduce to identity and scaled Laplacian") {
  Rng rng(91);
  const AssetGraph g = AssetGraph::from_weights(testutil::random_weights(6, rng));
  const Eigen::VectorXd x = testutil::random_vector(6, rng);

  Eigen::VectorXd theta1(1);
  theta1 << 1.0;
  CHECK((cheb_apply(g, x, theta1) - x).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd theta2(2);
  theta2 << 0.0, 1.0;
  const Eigen::VectorXd expected = g.scaled_laplacian() * x;
  CHECK((cheb_apply(g, x, theta2) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cheb_apply: recurrence equals the dense spectral oracle (K <= 8, m <= 12)") {
  Rng rng(2024);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 3 + static_cast<int>(rng.uniform_int(0, 9));
    const AssetGraph g = AssetGraph::from_weights(testutil::random_weights(m, rng, 0.15));
    if (g.lambda_max < 1e-9) continue;
    const int order = 1 + static_cast<int>(rng.uniform_int(0, 7));
    const Eigen::VectorXd theta = testutil::random_vector(order, rng);
    const Eigen::VectorXd x = testutil::random_vector(m, rng);
    const Eigen::VectorXd got = cheb_apply(g, x, theta);
    const Eigen::VectorXd want = dense_spectral_oracle(g, x, theta);
    worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("cheb_apply: linear in the signal") {
  Rng rng(13);
  const AssetGraph g = AssetGraph::from_weights(testutil::random_weights(8, rng));
  const Eigen::VectorXd theta = testutil::random_vector(4, rng);
  for (int trial = 0; trial < 10; ++trial) {
    const Eigen::VectorXd x = testutil::random_vector(8, rng);
    const Eigen::VectorXd y = testutil::random_vector(8, rng);
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    const Eigen::VectorXd lhs = cheb_apply(g, a * x + b * y, theta);
    const Eigen::VectorXd rhs = a * cheb_apply(g, x, theta) + b * cheb_apply(g, y, theta);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("cheb_apply: degenerate graph errors") {
  const AssetGraph g = AssetGraph::from_weights(Eigen::MatrixXd::Zero(4, 4));
  CHECK(g.lambda_max == doctest::Approx(0.0));
  Eigen::VectorXd theta(2);
  theta << 1.0, 0.5;
  CHECK_THROWS_AS(static_cast<void>(cheb_apply(g, Eigen::VectorXd::Ones(4), theta)),
                  numeric_error);
}

TEST_CASE("graph determinism: rebuilding from the same rows gives identical weights") {
  const Panel panel = synthetic_panel(4, 90, 0.02, 11);
  const AssetGraph g1 = build_graph(panel, 70, 10);
  const AssetGraph g2 = build_graph(panel, 70, 10);
  CHECK((g1.weights - g2.weights).cwiseAbs().maxCoeff() == 0.0);
  CHECK((g1.eigenvectors - g2.eigenvectors).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gcn layer: zero coefficients give sigmoid(0) = 0.5 everywhere") {
  Rng rng(3);
  const AssetGraph g = AssetGraph::from_weights(testutil::random_weights(5, rng));
  const Tensor latent = Tensor::uniform({3, 5, 4}, 1.0, rng);
  const Tensor theta = Tensor::zeros({3, 3, 3});
  const Tensor out = gcn_layer_eval(latent, theta, g.scaled_laplacian());
  CHECK(out.shape() == Shape{3, 5, 4});
  CHECK((out.array() - 0.5).abs().maxCoeff() == 0.0);
}

TEST_CASE("gcn layer: pure T_0 single-channel filter passes the input through") {
  Rng rng(5);
  const AssetGraph g = AssetGraph::from_weights(testutil::random_weights(6, rng));
  const Tensor x = Tensor::uniform({1, 6, 3}, 1.0, rng);
  Tensor theta = Tensor::zeros({1, 1, 4});
  theta[0] = 1.0;  // theta_0 = 1, rest 0
  auto pre = gcn_apply(ad::constant(x), ad::constant(theta), g.scaled_laplacian());
  CHECK((pre->value.array() - x.array()).abs().maxCoeff() < 1e-14);
}

TEST_CASE("gcn layer: coefficient and input gradients match finite differences") {
  Rng rng(17);
  for (int trial = 0; trial < 3; ++trial) {
    const int m = 3 + static_cast<int>(rng.uniform_int(0, 1));
    const AssetGraph g = AssetGraph::from_weights(testutil::random_weights(m, rng));
    ParamStore params;
    Param& theta = params.add("theta", Tensor::uniform({2, 2, 3}, 0.7, rng));
    Param& x = params.add("x", Tensor::uniform({2, m, 3}, 1.0, rng));
    const Eigen::MatrixXd lt = g.scaled_laplacian();

    auto forward = [&]() {
      auto out = ad::sigmoid(gcn_apply(ad::leaf(x), ad::leaf(theta), lt));
      return ad::mean(ad::mul(out, out));
    };
    params.zero_grads();
    ad::backward(forward());
    const auto r =
        testutil::finite_difference_check(params, [&]() { return forward()->value.item(); });
    CHECK(r.max_rel_err < 1e-4);
  }
}

TEST_CASE("k-locality: path graph, K=2 impulse does not reach node 3") {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  w(0, 1) = w(1, 0) = 1.0;
  w(1, 2) = w(2, 1) = 1.0;
  w(2, 3) = w(3, 2) = 1.0;
  const AssetGraph g = AssetGraph::from_weights(w);

  Eigen::VectorXd impulse = Eigen::VectorXd::Zero(4);
  impulse[0] = 1.0;
  Eigen::VectorXd theta = Eigen::VectorXd::Ones(2);
  const Eigen::VectorXd response = cheb_apply(g, impulse, theta);
  CHECK(std::abs(response[2]) < 1e-9);
  CHECK(std::abs(response[3]) < 1e-9);

  const KLocalityReport report = k_locality_check(g, 2);
  CHECK(report.ok);
  CHECK(report.impulses_checked == 4);
}

TEST_CASE("k-locality: K=1 responds only at the impulse node") {
  Rng rng(8);
  const AssetGraph g = AssetGraph::from_weights(testutil::random_weights(6, rng, 0.5));
  const KLocalityReport report = k_locality_check(g, 1);
  CHECK(report.ok);
}

TEST_CASE("k-locality: random sparse graphs, order 3 stays in the 2-hop ball") {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 5 + static_cast<int>(rng.uniform_int(0, 5));
    const AssetGraph g = AssetGraph::from_weights(testutil::random_weights(m, rng, 0.7));
    if (g.lambda_max < 1e-9) continue;
    const KLocalityReport report = k_locality_check(g, 3);
    CHECK(report.max_leakage < 1e-9);
  }
}
