#pragma once

#include <span>
#include <vector>

#include "gfolio/errors.hpp"

namespace gfolio {

// Largest peak-to-subsequent-trough decline as a fraction of the peak, in
// [0, 1]. Zero for monotone non-decreasing curves.
double max_drawdown(std::span<const double> curve);

// Mean excess return over the sample standard deviation (ddof = 1) of the
// excess returns. A zero standard deviation is an error.
double sharpe_ratio(std::span<const double> portfolio_returns,
                    std::span<const double> benchmark_returns);

// Empirical value-at-risk and expected shortfall of a loss sample. VaR is
// the ascending order statistic at 1-based index ceil(alpha * N) (lower
// interpolation); CVaR averages the samples at or above it.
struct TailRisk {
  double var = 0;
  double cvar = 0;
};
TailRisk cvar(std::span<const double> losses, double alpha);

}  // namespace gfolio
