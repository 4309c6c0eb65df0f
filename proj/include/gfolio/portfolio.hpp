#pragma once

#include <Eigen/Core>
#include <span>

#include "gfolio/errors.hpp"

namespace gfolio {

// Allocation over cash (index 0) plus m assets: non-negative entries summing
// to one within 1e-12. Constructed only through validation.
class WeightVector {
 public:
  explicit WeightVector(Eigen::VectorXd weights);
  static WeightVector all_cash(int num_assets);

  const Eigen::VectorXd& vec() const { return w_; }
  int num_assets() const { return static_cast<int>(w_.size()) - 1; }
  double cash() const { return w_[0]; }
  double asset(int i) const { return w_[i + 1]; }

 private:
  Eigen::VectorXd w_;
};

// Day-over-day price ratios with a leading exact 1 for cash; entries > 0.
class PriceRelative {
 public:
  explicit PriceRelative(Eigen::VectorXd relatives);
  // Elementwise v_t / v_prev over asset prices (cash entry prepended).
  static PriceRelative from_prices(const Eigen::VectorXd& v_t, const Eigen::VectorXd& v_prev);

  const Eigen::VectorXd& vec() const { return y_; }
  int num_assets() const { return static_cast<int>(y_.size()) - 1; }

 private:
  Eigen::VectorXd y_;
};

// Proportional commission rates; zero admitted for frictionless tests.
struct CommissionSchedule {
  double sell = 0.0025;
  double buy = 0.0025;

  void validate() const;
};

struct PortfolioState {
  WeightVector weights;
  double value = 1.0;
  double last_mu = 1.0;

  static PortfolioState initial(int num_assets, double value);
};

// Weights after one day of price motion, before any rebalancing:
// w' = (y ⊙ w) / (y · w).
WeightVector drift_weights(const WeightVector& w_prev, const PriceRelative& y);

// Transaction factor: the fixed point of
//   mu = [1 - c_b w'_0 - (c_s + c_b - c_s c_b) * sum_i relu(w'_i - mu w_i)]
//        / (1 - c_b w_0)
// where w' is the drifted vector and w the rebalance target. Iteration
// starts at mu_0 = c_s + c_b and stops when successive iterates differ by
// less than `tol`. When the right-hand side is exactly self-consistent at
// mu = 1 (zero fees, or no rebalancing volume) the exact value 1 is
// returned.
struct MuSolution {
  double mu = 1.0;
  int iterations = 0;
};
MuSolution solve_transaction_factor(const WeightVector& w_drift, const WeightVector& w_target,
                                    const CommissionSchedule& fees, double tol = 1e-12,
                                    int max_iter = 200);
double transaction_factor(const WeightVector& w_drift, const WeightVector& w_target,
                          const CommissionSchedule& fees, double tol = 1e-12, int max_iter = 200);

// Gross one-day rebalancing volume implied by the transaction factor: the
// two relu sums (amounts sold and bought across assets).
struct RebalanceVolume {
  double gross_sells = 0;
  double gross_buys = 0;
};
RebalanceVolume rebalance_volume(const WeightVector& w_drift, const WeightVector& w_target,
                                 double mu);

// One accounting step: apply price motion to the held weights, rebalance to
// the target through the transaction factor, and report both return rates.
struct StepResult {
  PortfolioState state;
  double return_rate = 0;  // mu * (y . w) - 1
  double log_return = 0;   // ln(mu * (y . w))
  double mu = 1.0;
};
StepResult step_value(const PortfolioState& state, const PriceRelative& y,
                      const WeightVector& w_target, const CommissionSchedule& fees);

// Mean of the per-step logarithmic returns over the horizon t_f.
double episode_reward(std::span<const double> log_returns, int t_f);

}  // namespace gfolio
