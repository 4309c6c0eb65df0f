#pragma once

#include <Eigen/Core>
#include <vector>

#include "gfolio/panel.hpp"

namespace gfolio {

// Per-asset feature block for one trading window: an 11 x n matrix whose
// rows are the normalized low/close/high price ratios followed by the eight
// day-over-day indicator ratios, columns running over the n most recent days
// ending at the window's anchor day.
//
// Row layout (fixed):
//   0 low/open   1 close/open   2 high/open
//   3..10 indicator(t) / indicator(t-1) in the canonical indicator order.
struct NormalizedWindow {
  static constexpr int kPriceRows = 3;
  static constexpr int kRows = kPriceRows + kNumIndicators;  // 11

  std::vector<Eigen::MatrixXd> per_asset;  // each kRows x window
  int window = 0;

  int num_assets() const { return static_cast<int>(per_asset.size()); }
};

// Builds the window ending at panel row t with n columns. Price rows are
// same-day ratios to the open; indicator rows are ratios to the previous
// day's value. A flat indicator stream (0/0) reads as "unchanged" (ratio 1);
// a zero denominator with a moving numerator is an error naming the asset
// and date.
NormalizedWindow normalize_window(const Panel& panel, int t, int n);

// Earliest panel row for which a window of length n exists (indicator
// warm-up plus the previous-day denominators).
int first_window_row(const Panel& panel, int n);

// One day's 11-entry feature column for one asset.
Eigen::VectorXd day_feature_column(const Panel& panel, int asset, int day);

// Feature columns of every (asset, day) pair in [first_day, last_day],
// deduplicated autoencoder training fodder (windows of adjacent days share
// columns).
Eigen::MatrixXd day_feature_matrix(const Panel& panel, int first_day, int last_day);

}  // namespace gfolio
