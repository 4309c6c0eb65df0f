#pragma once

#include <Eigen/Core>

#include "gfolio/portfolio.hpp"
#include "gfolio/rng.hpp"

namespace gfolio {

// Stochastic policy over the portfolio simplex: Dirichlet with
// alpha = concentration * mean. Exploration shrinks as the concentration
// grows; the mean action is recovered in the deterministic limit.
struct PolicyDistribution {
  WeightVector mean;
  double concentration = 50.0;
};

struct ActionSample {
  WeightVector action;
  double log_prob = 0.0;
};

// Dirichlet parameters from a mean: entries clamped to >= epsilon and
// renormalized (a degenerate zero entry would put the distribution on a
// face of the simplex where the log-density diverges), then scaled.
Eigen::VectorXd policy_alpha(const WeightVector& mean, double concentration,
                             double epsilon = 1e-8);

// Dirichlet log-density at x (both on the simplex, x clamped away from 0).
double dirichlet_log_density(const Eigen::VectorXd& alpha, const Eigen::VectorXd& x);

// Draws an action by normalizing Gamma(alpha_i) variates and reports the
// exact log-density at the returned (clamped) point.
ActionSample sample_action(const PolicyDistribution& dist, Rng& rng);

}  // namespace gfolio
