#include "gfolio/policy.hpp"

#include <cmath>

namespace gfolio {

namespace {

// Sampled components this small are clamped before the density evaluation;
// with sensible concentrations the clamp never fires.
constexpr double kActionFloor = 1e-12;

}  // namespace

Eigen::VectorXd policy_alpha(const WeightVector& mean, double concentration, double epsilon) {
  if (!(concentration > 0)) throw numeric_error("policy_alpha: concentration must be > 0");
  Eigen::VectorXd m = mean.vec().cwiseMax(epsilon);
  m /= m.sum();
  return concentration * m;
}

double dirichlet_log_density(const Eigen::VectorXd& alpha, const Eigen::VectorXd& x) {
  if (alpha.size() != x.size()) {
    throw shape_error("dirichlet_log_density: alpha length " + std::to_string(alpha.size()) +
                      " vs point length " + std::to_string(x.size()));
  }
  if ((alpha.array() <= 0.0).any()) {
    throw numeric_error("dirichlet_log_density: alpha must be strictly positive");
  }
  if ((x.array() <= 0.0).any()) {
    throw numeric_error("dirichlet_log_density: point must be strictly positive");
  }
  double lp = std::lgamma(alpha.sum());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    lp -= std::lgamma(alpha[i]);
    lp += (alpha[i] - 1.0) * std::log(x[i]);
  }
  return lp;
}

ActionSample sample_action(const PolicyDistribution& dist, Rng& rng) {
  const Eigen::VectorXd alpha = policy_alpha(dist.mean, dist.concentration);
  Eigen::VectorXd draws(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) draws[i] = rng.gamma(alpha[i]);
  // Keep the point strictly inside the simplex so the density stays finite.
  draws = draws.cwiseMax(kActionFloor);
  draws /= draws.sum();

  ActionSample out{WeightVector(draws), dirichlet_log_density(alpha, draws)};
  if (!std::isfinite(out.log_prob)) {
    throw numeric_error("sample_action: non-finite log-probability");
  }
  return out;
}

}  // namespace gfolio
