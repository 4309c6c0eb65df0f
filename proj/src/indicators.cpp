#include "gfolio/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gfolio {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Simple moving average of `src` over `window`, defined once `window` values
// starting at `first_defined` are available.
Eigen::VectorXd sma(const Eigen::VectorXd& src, int window, int first_defined) {
  const int n = static_cast<int>(src.size());
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = first_defined + window - 1; t < n; ++t) {
    out[t] = src.segment(t - window + 1, window).mean();
  }
  return out;
}

// Linearly weighted moving average, weight `window` on the newest sample.
Eigen::VectorXd wma(const Eigen::VectorXd& src, int window, int first_defined) {
  const int n = static_cast<int>(src.size());
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  const double denom = window * (window + 1) / 2.0;
  for (int t = first_defined + window - 1; t < n; ++t) {
    double acc = 0.0;
    for (int j = 0; j < window; ++j) acc += (window - j) * src[t - j];
    out[t] = acc / denom;
  }
  return out;
}

Eigen::VectorXd true_range(const OhlcvSeries& s) {
  const int n = s.size();
  Eigen::VectorXd tr = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = 1; t < n; ++t) {
    const double prev_close = s.rows[t - 1].close;
    tr[t] = std::max({s.rows[t].high - s.rows[t].low, std::abs(s.rows[t].high - prev_close),
                      std::abs(s.rows[t].low - prev_close)});
  }
  return tr;
}

// Wilder smoothing: seed with the plain average of the first `window` values
// (starting at `first`), then s_t = (s_{t-1} * (window-1) + x_t) / window.
Eigen::VectorXd wilder_smooth(const Eigen::VectorXd& src, int window, int first) {
  const int n = static_cast<int>(src.size());
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  const int seed = first + window - 1;
  if (seed >= n) return out;
  out[seed] = src.segment(first, window).mean();
  for (int t = seed + 1; t < n; ++t) {
    out[t] = (out[t - 1] * (window - 1) + src[t]) / window;
  }
  return out;
}

// Average true range: Wilder-smoothed true range.
Eigen::VectorXd compute_atr(const OhlcvSeries& s, int window) {
  return wilder_smooth(true_range(s), window, 1);
}

// Commodity channel index: (TP - SMA(TP)) / (0.015 * mean |TP - SMA|), with
// typical price TP = (H+L+C)/3. A zero mean deviation (flat window) reads as
// CCI = 0.
Eigen::VectorXd compute_cci(const OhlcvSeries& s, int window) {
  const int n = s.size();
  Eigen::VectorXd tp(n);
  for (int t = 0; t < n; ++t) tp[t] = (s.rows[t].high + s.rows[t].low + s.rows[t].close) / 3.0;
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = window - 1; t < n; ++t) {
    const auto seg = tp.segment(t - window + 1, window);
    const double avg = seg.mean();
    const double md = (seg.array() - avg).abs().mean();
    out[t] = md > 0.0 ? (tp[t] - avg) / (0.015 * md) : 0.0;
  }
  return out;
}

// Wilder directional movement machinery, shared by the commodity selection
// index: smoothed +DM/-DM/TR -> +DI/-DI -> DX -> ADX -> ADXR.
Eigen::VectorXd compute_adxr(const OhlcvSeries& s, int window) {
  const int n = s.size();
  Eigen::VectorXd plus_dm = Eigen::VectorXd::Constant(n, kNaN);
  Eigen::VectorXd minus_dm = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = 1; t < n; ++t) {
    const double up = s.rows[t].high - s.rows[t - 1].high;
    const double down = s.rows[t - 1].low - s.rows[t].low;
    plus_dm[t] = (up > down && up > 0) ? up : 0.0;
    minus_dm[t] = (down > up && down > 0) ? down : 0.0;
  }
  const Eigen::VectorXd s_plus = wilder_smooth(plus_dm, window, 1);
  const Eigen::VectorXd s_minus = wilder_smooth(minus_dm, window, 1);
  const Eigen::VectorXd s_tr = wilder_smooth(true_range(s), window, 1);

  Eigen::VectorXd dx = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = window; t < n; ++t) {
    if (!(s_tr[t] > 0.0)) {
      dx[t] = 0.0;
      continue;
    }
    const double plus_di = 100.0 * s_plus[t] / s_tr[t];
    const double minus_di = 100.0 * s_minus[t] / s_tr[t];
    const double sum_di = plus_di + minus_di;
    dx[t] = sum_di > 0.0 ? 100.0 * std::abs(plus_di - minus_di) / sum_di : 0.0;
  }
  const Eigen::VectorXd adx = wilder_smooth(dx, window, window);
  Eigen::VectorXd adxr = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = 3 * window - 1; t < n; ++t) adxr[t] = 0.5 * (adx[t] + adx[t - window]);
  return adxr;
}

// Commodity selection index, stock adaptation: ADXR * ATR * scale. The
// classic contract-value/margin/commission factor has no stock equivalent
// and collapses into the configurable scale.
Eigen::VectorXd compute_csi(const OhlcvSeries& s, int atr_window, double scale) {
  const Eigen::VectorXd adxr = compute_adxr(s, atr_window);
  const Eigen::VectorXd atr = compute_atr(s, atr_window);
  const int n = s.size();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = 3 * atr_window - 1; t < n; ++t) out[t] = adxr[t] * atr[t] * scale;
  return out;
}

// Sibbet demand index. Buying/selling pressure start from volume; the
// pressure on the losing side is damped by exp(K * |dP%|) where
// K = 3 * price / (SMA of the two-day range). Output is the bounded
// oscillator (BP - SP) / max(BP, SP) of the `window`-day pressure averages.
Eigen::VectorXd compute_demand_index(const OhlcvSeries& s, int window) {
  const int n = s.size();
  Eigen::VectorXd price(n), range2 = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = 0; t < n; ++t) {
    price[t] = (s.rows[t].high + s.rows[t].low + 2.0 * s.rows[t].close) / 4.0;
  }
  for (int t = 1; t < n; ++t) {
    range2[t] = std::max(s.rows[t].high, s.rows[t - 1].high) -
                std::min(s.rows[t].low, s.rows[t - 1].low);
  }
  const Eigen::VectorXd va = sma(range2, window, 1);

  Eigen::VectorXd bp = Eigen::VectorXd::Constant(n, kNaN);
  Eigen::VectorXd sp = Eigen::VectorXd::Constant(n, kNaN);
  const int pressure_start = window;  // va defined from here
  for (int t = pressure_start; t < n; ++t) {
    const double v = s.rows[t].volume;
    const double dp = (price[t] - price[t - 1]) / price[t - 1];
    if (dp == 0.0) {
      bp[t] = sp[t] = v;
      continue;
    }
    // Exponent capped to keep the damped side finite when the range average
    // degenerates to zero.
    const double k = va[t] > 0.0 ? 3.0 * price[t] / va[t] : std::numeric_limits<double>::infinity();
    const double damp = std::exp(-std::min(k * std::abs(dp), 88.0));
    if (dp > 0.0) {
      bp[t] = v;
      sp[t] = v * damp;
    } else {
      bp[t] = v * damp;
      sp[t] = v;
    }
  }
  const Eigen::VectorXd bp_avg = sma(bp, window, pressure_start);
  const Eigen::VectorXd sp_avg = sma(sp, window, pressure_start);
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = 2 * window - 1; t < n; ++t) {
    const double hi = std::max(bp_avg[t], sp_avg[t]);
    out[t] = hi > 0.0 ? (bp_avg[t] - sp_avg[t]) / hi : 0.0;
  }
  return out;
}

// Chande dynamic momentum index: an RSI whose look-back adapts to recent
// volatility. The ratio Vi = sd5 / SMA10(sd5) sets the period
// TD = clamp(int(14 / Vi), 5, 30); the RSI over the last TD changes uses
// plain averages of gains and losses. Stored centered at zero (RSI - 50):
// the textbook 0..100 scale pins an all-down window to exactly 0, where the
// day-over-day ratio normalization is undefined; centered, a flat window
// reads 0 (handled as "unchanged") and the boundaries sit at -50/+50.
Eigen::VectorXd compute_dmi(const OhlcvSeries& s) {
  constexpr int kSdWindow = 5;
  constexpr int kSmaWindow = 10;
  constexpr int kBasePeriod = 14;
  constexpr int kMinPeriod = 5;
  constexpr int kMaxPeriod = 30;

  const int n = s.size();
  Eigen::VectorXd close(n);
  for (int t = 0; t < n; ++t) close[t] = s.rows[t].close;

  Eigen::VectorXd sd = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = kSdWindow - 1; t < n; ++t) {
    const auto seg = close.segment(t - kSdWindow + 1, kSdWindow);
    const double mean = seg.mean();
    sd[t] = std::sqrt((seg.array() - mean).square().sum() / kSdWindow);
  }
  const Eigen::VectorXd sd_avg = sma(sd, kSmaWindow, kSdWindow - 1);

  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  const int first = std::max(kSdWindow + kSmaWindow - 2, kMaxPeriod);
  for (int t = first; t < n; ++t) {
    const double vi = sd_avg[t] > 0.0 ? sd[t] / sd_avg[t] : 1.0;
    int period = vi > 0.0 ? static_cast<int>(kBasePeriod / vi) : kMaxPeriod;
    period = std::clamp(period, kMinPeriod, kMaxPeriod);
    double gain = 0.0, loss = 0.0;
    for (int j = t - period + 1; j <= t; ++j) {
      const double change = close[j] - close[j - 1];
      if (change > 0) gain += change;
      else loss -= change;
    }
    gain /= period;
    loss /= period;
    if (gain == 0.0 && loss == 0.0) out[t] = 0.0;
    else if (loss == 0.0) out[t] = 50.0;
    else if (gain == 0.0) out[t] = -50.0;
    else out[t] = 100.0 * gain / (gain + loss) - 50.0;
  }
  return out;
}

// Exponential moving average, seeded with the SMA of the first window:
// ema_t = lambda * close_t + (1 - lambda) * ema_{t-1}, lambda = 2/(window+1).
Eigen::VectorXd compute_ema(const OhlcvSeries& s, int window) {
  const int n = s.size();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  if (window - 1 >= n) return out;
  double acc = 0.0;
  for (int t = 0; t < window; ++t) acc += s.rows[t].close;
  out[window - 1] = acc / window;
  const double lambda = 2.0 / (window + 1);
  for (int t = window; t < n; ++t) {
    out[t] = lambda * s.rows[t].close + (1.0 - lambda) * out[t - 1];
  }
  return out;
}

// Hull moving average: WMA(2*WMA(n/2) - WMA(n), round(sqrt(n))).
Eigen::VectorXd compute_hma(const OhlcvSeries& s, int window) {
  const int n = s.size();
  Eigen::VectorXd close(n);
  for (int t = 0; t < n; ++t) close[t] = s.rows[t].close;
  const int half = std::max(1, window / 2);
  const int sqrt_w = std::max(1, static_cast<int>(std::lround(std::sqrt(window))));
  const Eigen::VectorXd wma_half = wma(close, half, 0);
  const Eigen::VectorXd wma_full = wma(close, window, 0);
  Eigen::VectorXd raw = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = window - 1; t < n; ++t) raw[t] = 2.0 * wma_half[t] - wma_full[t];
  return wma(raw, sqrt_w, window - 1);
}

// Momentum: close_t - close_{t-window}.
Eigen::VectorXd compute_momentum(const OhlcvSeries& s, int window) {
  const int n = s.size();
  Eigen::VectorXd out = Eigen::VectorXd::Constant(n, kNaN);
  for (int t = window; t < n; ++t) out[t] = s.rows[t].close - s.rows[t - window].close;
  return out;
}

}  // namespace

const char* indicator_name(Indicator ind) {
  switch (ind) {
    case Indicator::Atr: return "atr";
    case Indicator::Cci: return "cci";
    case Indicator::Csi: return "csi";
    case Indicator::DemandIndex: return "demand_index";
    case Indicator::Dmi: return "dmi";
    case Indicator::Ema: return "ema";
    case Indicator::Hma: return "hma";
    case Indicator::Momentum: return "momentum";
  }
  return "?";
}

void IndicatorParams::validate() const {
  auto check = [](int w, const char* name) {
    if (w < 2) throw config_error(std::string("indicator window '") + name + "' must be >= 2");
  };
  check(atr_window, "atr");
  check(cci_window, "cci");
  check(ema_window, "ema");
  check(hma_window, "hma");
  check(momentum_window, "momentum");
  check(demand_window, "demand");
  if (!(csi_scale > 0)) throw config_error("csi_scale must be > 0");
}

int IndicatorSet::max_warmup() const {
  return *std::max_element(warmup.begin(), warmup.end());
}

double IndicatorSet::at(int row, Indicator ind) const {
  const int col = static_cast<int>(ind);
  if (row < warmup[static_cast<size_t>(col)] || row >= rows()) {
    throw data_error(std::string("indicator '") + indicator_name(ind) + "' undefined at row " +
                     std::to_string(row) + " (warm-up " +
                     std::to_string(warmup[static_cast<size_t>(col)]) + ")");
  }
  return values(row, col);
}

bool IndicatorSet::defined(int row, Indicator ind) const {
  return row >= warmup[static_cast<size_t>(static_cast<int>(ind))] && row < rows();
}

IndicatorSet compute_indicators(const OhlcvSeries& series, const IndicatorParams& params) {
  params.validate();
  const int n = series.size();

  IndicatorSet set;
  set.warmup[static_cast<size_t>(static_cast<int>(Indicator::Atr))] = params.atr_window;
  set.warmup[static_cast<size_t>(static_cast<int>(Indicator::Cci))] = params.cci_window - 1;
  set.warmup[static_cast<size_t>(static_cast<int>(Indicator::Csi))] = 3 * params.atr_window - 1;
  set.warmup[static_cast<size_t>(static_cast<int>(Indicator::DemandIndex))] =
      2 * params.demand_window - 1;
  set.warmup[static_cast<size_t>(static_cast<int>(Indicator::Dmi))] = 30;  // max adaptive period
  set.warmup[static_cast<size_t>(static_cast<int>(Indicator::Ema))] = params.ema_window - 1;
  const int hma_sqrt = std::max(1, static_cast<int>(std::lround(std::sqrt(params.hma_window))));
  set.warmup[static_cast<size_t>(static_cast<int>(Indicator::Hma))] =
      params.hma_window - 1 + hma_sqrt - 1;
  set.warmup[static_cast<size_t>(static_cast<int>(Indicator::Momentum))] = params.momentum_window;

  const int need = set.max_warmup() + 1;
  if (n < need) {
    throw data_error("series '" + series.asset_id + "' has " + std::to_string(n) +
                     " rows; indicators need at least " + std::to_string(need));
  }

  set.values.resize(n, kNumIndicators);
  set.values.col(static_cast<int>(Indicator::Atr)) = compute_atr(series, params.atr_window);
  set.values.col(static_cast<int>(Indicator::Cci)) = compute_cci(series, params.cci_window);
  set.values.col(static_cast<int>(Indicator::Csi)) =
      compute_csi(series, params.atr_window, params.csi_scale);
  set.values.col(static_cast<int>(Indicator::DemandIndex)) =
      compute_demand_index(series, params.demand_window);
  set.values.col(static_cast<int>(Indicator::Dmi)) = compute_dmi(series);
  set.values.col(static_cast<int>(Indicator::Ema)) = compute_ema(series, params.ema_window);
  set.values.col(static_cast<int>(Indicator::Hma)) = compute_hma(series, params.hma_window);
  set.values.col(static_cast<int>(Indicator::Momentum)) =
      compute_momentum(series, params.momentum_window);

  // No NaN may survive past its column's warm-up.
  for (int c = 0; c < kNumIndicators; ++c) {
    for (int t = set.warmup[static_cast<size_t>(c)]; t < n; ++t) {
      if (!std::isfinite(set.values(t, c))) {
        throw numeric_error("indicator '" + std::string(indicator_name(static_cast<Indicator>(c))) +
                            "' produced a non-finite value at row " + std::to_string(t) +
                            " of series '" + series.asset_id + "'");
      }
    }
  }
  return set;
}

}  // namespace gfolio
