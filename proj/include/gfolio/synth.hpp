#pragma once

#include <vector>

#include "gfolio/ohlcv.hpp"
#include "gfolio/rng.hpp"

namespace gfolio {

// Correlated geometric random walk generator for demo and test markets.
struct SynthSpec {
  int assets = 5;
  int days = 500;
  std::vector<double> drift;  // per-asset daily log-return drift (empty = 0)
  double volatility = 0.01;   // daily log-return standard deviation
  double correlation = 0.3;   // common pairwise correlation of log-returns
  double start_price = 100.0;
  double base_volume = 1e6;
  Date start_date{2015, 1, 2};

  void validate() const;
};

// Generates one OHLCV series per asset on a shared weekday calendar.
// Closes follow exp of a correlated Gaussian walk (equicorrelation via its
// closed-form Cholesky); open is the previous close; high/low bracket them.
std::vector<OhlcvSeries> generate_synthetic_market(const SynthSpec& spec, Rng& rng);

}  // namespace gfolio
