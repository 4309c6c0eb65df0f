#pragma once

#include <Eigen/Core>
#include <array>
#include <string>

#include "gfolio/ohlcv.hpp"

namespace gfolio {

// The eight technical indicators used as features, in the canonical column
// order shared by every downstream consumer.
enum class Indicator : int {
  Atr = 0,          // average true range
  Cci = 1,          // commodity channel index
  Csi = 2,          // commodity selection index
  DemandIndex = 3,  // Sibbet demand index
  Dmi = 4,          // dynamic momentum index (Chande)
  Ema = 5,          // exponential moving average
  Hma = 6,          // Hull moving average
  Momentum = 7,     // n-day price momentum
};

inline constexpr int kNumIndicators = 8;

const char* indicator_name(Indicator ind);

// Window lengths. Formulas follow the standard technical-analysis
// definitions; each one is documented at its implementation site.
struct IndicatorParams {
  int atr_window = 14;
  int cci_window = 20;
  int ema_window = 12;
  int hma_window = 9;
  int momentum_window = 10;
  int demand_window = 10;
  // Stock adaptation of the commodity selection index drops the
  // contract-size/margin factor; this scale stands in for it.
  double csi_scale = 1.0;

  void validate() const;
};

// Indicator streams for one asset. Rows align with the source series; values
// before an indicator's warm-up are NaN, values at or after it are finite.
struct IndicatorSet {
  Eigen::MatrixXd values;              // rows x kNumIndicators
  std::array<int, kNumIndicators> warmup{};  // first defined row per column

  int rows() const { return static_cast<int>(values.rows()); }
  int max_warmup() const;
  double at(int row, Indicator ind) const;  // throws before warm-up
  bool defined(int row, Indicator ind) const;
};

// Computes all eight indicator streams. The series must be longer than the
// largest warm-up; the error message states the required length.
IndicatorSet compute_indicators(const OhlcvSeries& series, const IndicatorParams& params = {});

}  // namespace gfolio
