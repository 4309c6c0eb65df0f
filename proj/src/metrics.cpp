#include "gfolio/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gfolio {

double max_drawdown(std::span<const double> curve) {
  if (curve.empty()) throw data_error("max_drawdown: empty curve");
  double peak = 0.0;
  double worst = 0.0;
  for (double v : curve) {
    if (!(v > 0)) throw numeric_error("max_drawdown: curve values must be positive");
    peak = std::max(peak, v);
    worst = std::max(worst, (peak - v) / peak);
  }
  return worst;
}

double sharpe_ratio(std::span<const double> portfolio_returns,
                    std::span<const double> benchmark_returns) {
  if (portfolio_returns.size() != benchmark_returns.size()) {
    throw shape_error("sharpe_ratio: return series of lengths " +
                      std::to_string(portfolio_returns.size()) + " vs " +
                      std::to_string(benchmark_returns.size()));
  }
  const size_t n = portfolio_returns.size();
  if (n < 2) throw data_error("sharpe_ratio: need at least two return observations");

  double mean = 0.0;
  for (size_t i = 0; i < n; ++i) mean += portfolio_returns[i] - benchmark_returns[i];
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double d = portfolio_returns[i] - benchmark_returns[i] - mean;
    var += d * d;
  }
  var /= static_cast<double>(n - 1);
  if (!(var > 0)) {
    throw numeric_error("sharpe_ratio: zero volatility of excess returns; ratio undefined");
  }
  return mean / std::sqrt(var);
}

TailRisk cvar(std::span<const double> losses, double alpha) {
  if (losses.empty()) throw data_error("cvar: empty loss sample");
  if (!(alpha > 0 && alpha < 1)) throw numeric_error("cvar: alpha must lie in (0, 1)");

  std::vector<double> sorted(losses.begin(), losses.end());
  std::sort(sorted.begin(), sorted.end());
  const size_t n = sorted.size();
  // 1-based order statistic ceil(alpha * n), clamped to the sample.
  size_t rank = static_cast<size_t>(std::ceil(alpha * static_cast<double>(n)));
  rank = std::clamp<size_t>(rank, 1, n);

  TailRisk out;
  out.var = sorted[rank - 1];
  double acc = 0.0;
  for (size_t i = rank - 1; i < n; ++i) acc += sorted[i];
  out.cvar = acc / static_cast<double>(n - rank + 1);
  return out;
}

}  // namespace gfolio
