#include "gfolio/portfolio.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace gfolio {

namespace {

constexpr double kSimplexTol = 1e-12;

}  // namespace

WeightVector::WeightVector(Eigen::VectorXd weights) : w_(std::move(weights)) {
  if (w_.size() < 1) throw shape_error("WeightVector: needs at least the cash entry");
  if (!w_.array().isFinite().all()) throw numeric_error("WeightVector: non-finite entry");
  if ((w_.array() < 0.0).any()) {
    throw numeric_error("WeightVector: negative entry " + std::to_string(w_.minCoeff()));
  }
  const double sum = w_.sum();
  if (std::abs(sum - 1.0) > kSimplexTol) {
    throw numeric_error("WeightVector: entries sum to " + std::to_string(sum) + ", expected 1");
  }
}

WeightVector WeightVector::all_cash(int num_assets) {
  if (num_assets < 0) throw shape_error("WeightVector::all_cash: negative asset count");
  Eigen::VectorXd w = Eigen::VectorXd::Zero(num_assets + 1);
  w[0] = 1.0;
  return WeightVector(std::move(w));
}

PriceRelative::PriceRelative(Eigen::VectorXd relatives) : y_(std::move(relatives)) {
  if (y_.size() < 1) throw shape_error("PriceRelative: needs at least the cash entry");
  if (y_[0] != 1.0) {
    throw numeric_error("PriceRelative: cash entry must be exactly 1, got " +
                        std::to_string(y_[0]));
  }
  if (!y_.array().isFinite().all() || (y_.array() <= 0.0).any()) {
    throw numeric_error("PriceRelative: entries must be positive and finite");
  }
}

PriceRelative PriceRelative::from_prices(const Eigen::VectorXd& v_t,
                                         const Eigen::VectorXd& v_prev) {
  if (v_t.size() != v_prev.size()) {
    throw shape_error("PriceRelative::from_prices: price vectors of length " +
                      std::to_string(v_t.size()) + " vs " + std::to_string(v_prev.size()));
  }
  if ((v_t.array() <= 0.0).any() || (v_prev.array() <= 0.0).any()) {
    throw numeric_error("PriceRelative::from_prices: prices must be positive");
  }
  Eigen::VectorXd y(v_t.size() + 1);
  y[0] = 1.0;
  y.tail(v_t.size()) = v_t.array() / v_prev.array();
  return PriceRelative(std::move(y));
}

void CommissionSchedule::validate() const {
  if (!(sell >= 0.0 && sell < 1.0) || !(buy >= 0.0 && buy < 1.0)) {
    throw config_error("commission rates must lie in [0, 1)");
  }
}

PortfolioState PortfolioState::initial(int num_assets, double value) {
  if (!(value > 0)) throw numeric_error("PortfolioState: initial value must be positive");
  return {WeightVector::all_cash(num_assets), value, 1.0};
}

WeightVector drift_weights(const WeightVector& w_prev, const PriceRelative& y) {
  if (w_prev.vec().size() != y.vec().size()) {
    throw shape_error("drift_weights: weight length " + std::to_string(w_prev.vec().size()) +
                      " vs price relative length " + std::to_string(y.vec().size()));
  }
  const Eigen::VectorXd prod = y.vec().cwiseProduct(w_prev.vec());
  const double denom = prod.sum();  // y . w > 0 given the type invariants
  return WeightVector(prod / denom);
}

namespace {

// Right-hand side of the implicit transaction-factor equation.
double mu_rhs(const Eigen::VectorXd& wd, const Eigen::VectorXd& wt, double cs, double cb,
              double mu) {
  const int m = static_cast<int>(wd.size()) - 1;
  double sell_sum = 0.0;
  for (int i = 1; i <= m; ++i) sell_sum += std::max(0.0, wd[i] - mu * wt[i]);
  return (1.0 - cb * wd[0] - (cs + cb - cs * cb) * sell_sum) / (1.0 - cb * wt[0]);
}

}  // namespace

MuSolution solve_transaction_factor(const WeightVector& w_drift, const WeightVector& w_target,
                                    const CommissionSchedule& fees, double tol, int max_iter) {
  fees.validate();
  if (w_drift.vec().size() != w_target.vec().size()) {
    throw shape_error("transaction_factor: weight lengths " +
                      std::to_string(w_drift.vec().size()) + " vs " +
                      std::to_string(w_target.vec().size()));
  }
  if (!(tol > 0)) throw numeric_error("transaction_factor: tol must be > 0");

  const Eigen::VectorXd& wd = w_drift.vec();
  const Eigen::VectorXd& wt = w_target.vec();
  const double cs = fees.sell, cb = fees.buy;

  // mu = 1 solves the equation exactly when it is self-consistent there
  // (zero fees, or no rebalancing volume at mu = 1).
  if (mu_rhs(wd, wt, cs, cb, 1.0) == 1.0) return {1.0, 0};

  double mu = cs + cb;
  for (int it = 1; it <= max_iter; ++it) {
    const double next = mu_rhs(wd, wt, cs, cb, mu);
    const double delta = std::abs(next - mu);
    mu = next;
    if (delta < tol) {
      if (!(mu > 0.0 && mu <= 1.0)) {
        throw numeric_error("transaction_factor: converged to mu=" + std::to_string(mu) +
                            " outside (0, 1]; inputs are inconsistent");
      }
      return {mu, it};
    }
  }
  throw numeric_error("transaction_factor: no convergence in " + std::to_string(max_iter) +
                      " iterations; last iterate mu=" + std::to_string(mu));
}

double transaction_factor(const WeightVector& w_drift, const WeightVector& w_target,
                          const CommissionSchedule& fees, double tol, int max_iter) {
  return solve_transaction_factor(w_drift, w_target, fees, tol, max_iter).mu;
}

RebalanceVolume rebalance_volume(const WeightVector& w_drift, const WeightVector& w_target,
                                 double mu) {
  RebalanceVolume v;
  const int m = w_drift.num_assets();
  for (int i = 1; i <= m; ++i) {
    const double d = w_drift.vec()[i] - mu * w_target.vec()[i];
    if (d > 0) v.gross_sells += d;
    else v.gross_buys -= d;
  }
  return v;
}

StepResult step_value(const PortfolioState& state, const PriceRelative& y,
                      const WeightVector& w_target, const CommissionSchedule& fees) {
  const WeightVector drifted = drift_weights(state.weights, y);
  const double mu = transaction_factor(drifted, w_target, fees);
  const double growth = y.vec().dot(state.weights.vec());
  StepResult r{PortfolioState{w_target, state.value * (mu * growth), mu}, mu * growth - 1.0,
               std::log(mu * growth), mu};
  if (!(r.state.value > 0) || !std::isfinite(r.state.value)) {
    throw numeric_error("step_value: portfolio value became non-positive");
  }
  return r;
}

double episode_reward(std::span<const double> log_returns, int t_f) {
  if (log_returns.empty()) throw data_error("episode_reward: empty trajectory");
  if (t_f < 1) throw numeric_error("episode_reward: horizon must be >= 1");
  const double total = std::accumulate(log_returns.begin(), log_returns.end(), 0.0);
  return total / static_cast<double>(t_f);
}

}  // namespace gfolio
