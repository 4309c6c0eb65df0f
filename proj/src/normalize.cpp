#include "gfolio/normalize.hpp"

#include <cmath>

namespace gfolio {

namespace {

void fill_day_column(const Panel& panel, int asset, int day, Eigen::Ref<Eigen::VectorXd> column) {
  const OhlcvBar& bar = panel.bar(asset, day);
  column[0] = bar.low / bar.open;
  column[1] = bar.close / bar.open;
  column[2] = bar.high / bar.open;
  const IndicatorSet& ind = panel.indicators(asset);
  for (int c = 0; c < kNumIndicators; ++c) {
    const auto which = static_cast<Indicator>(c);
    const double cur = ind.at(day, which);
    const double prev = ind.at(day - 1, which);
    double ratio;
    if (prev != 0.0) {
      ratio = cur / prev;
    } else if (cur == 0.0) {
      ratio = 1.0;  // flat stream reads as unchanged
    } else {
      throw data_error(std::string("normalize_window: indicator '") + indicator_name(which) +
                       "' of asset '" + panel.assets()[static_cast<size_t>(asset)] +
                       "' is zero on " + panel.date(day - 1).str() +
                       "; day-over-day ratio undefined");
    }
    if (!std::isfinite(ratio)) {
      throw numeric_error(std::string("normalize_window: non-finite ratio for indicator '") +
                          indicator_name(which) + "' of asset '" +
                          panel.assets()[static_cast<size_t>(asset)] + "' on " +
                          panel.date(day).str());
    }
    column[NormalizedWindow::kPriceRows + c] = ratio;
  }
}

}  // namespace

int first_window_row(const Panel& panel, int n) {
  // The oldest column's indicator ratio divides by the value at t - n, which
  // itself must be past every warm-up.
  return panel.indicator_warmup() + n;
}

Eigen::VectorXd day_feature_column(const Panel& panel, int asset, int day) {
  if (day < panel.indicator_warmup() + 1 || day >= panel.num_days()) {
    throw data_error("day_feature_column: row " + std::to_string(day) +
                     " is inside the indicator warm-up");
  }
  Eigen::VectorXd col(NormalizedWindow::kRows);
  fill_day_column(panel, asset, day, col);
  return col;
}

Eigen::MatrixXd day_feature_matrix(const Panel& panel, int first_day, int last_day) {
  if (first_day > last_day) throw data_error("day_feature_matrix: empty day range");
  if (first_day < panel.indicator_warmup() + 1 || last_day >= panel.num_days()) {
    throw data_error("day_feature_matrix: range [" + std::to_string(first_day) + ", " +
                     std::to_string(last_day) + "] not fully past the indicator warm-up");
  }
  const int m = panel.num_assets();
  const int days = last_day - first_day + 1;
  Eigen::MatrixXd out(NormalizedWindow::kRows, static_cast<Eigen::Index>(m) * days);
  Eigen::Index at = 0;
  for (int day = first_day; day <= last_day; ++day) {
    for (int a = 0; a < m; ++a) {
      fill_day_column(panel, a, day, out.col(at));
      ++at;
    }
  }
  return out;
}

NormalizedWindow normalize_window(const Panel& panel, int t, int n) {
  if (n < 1) throw shape_error("normalize_window: window must be >= 1");
  if (t >= panel.num_days() || t < first_window_row(panel, n)) {
    throw data_error("normalize_window: window of " + std::to_string(n) +
                     " days does not fit at row " + std::to_string(t) +
                     " (first usable row is " + std::to_string(first_window_row(panel, n)) + ")");
  }

  NormalizedWindow out;
  out.window = n;
  out.per_asset.reserve(static_cast<size_t>(panel.num_assets()));
  for (int a = 0; a < panel.num_assets(); ++a) {
    Eigen::MatrixXd block(NormalizedWindow::kRows, n);
    for (int j = 0; j < n; ++j) {
      fill_day_column(panel, a, t - n + 1 + j, block.col(j));
    }
    out.per_asset.push_back(std::move(block));
  }
  return out;
}

}  // namespace gfolio
