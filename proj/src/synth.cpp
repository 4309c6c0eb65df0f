#include "gfolio/synth.hpp"

#include <cmath>

namespace gfolio {

namespace {

// Sakamoto's day-of-week; 0 = Sunday.
int day_of_week(const Date& d) {
  static constexpr int t[] = {0, 3, 2, 5, 0, 3, 5, 1, 4, 6, 2, 4};
  int y = d.year;
  if (d.month < 3) y -= 1;
  return (y + y / 4 - y / 100 + y / 400 + t[d.month - 1] + d.day) % 7;
}

Date next_day(Date d) {
  d.day += 1;
  if (!is_valid_date(d.year, d.month, d.day)) {
    d.day = 1;
    d.month += 1;
    if (d.month > 12) {
      d.month = 1;
      d.year += 1;
    }
  }
  return d;
}

Date next_weekday(Date d) {
  do {
    d = next_day(d);
  } while (day_of_week(d) == 0 || day_of_week(d) == 6);
  return d;
}

}  // namespace

void SynthSpec::validate() const {
  if (assets < 1) throw config_error("synth: need at least one asset");
  if (days < 1) throw config_error("synth: need at least one day");
  if (!(volatility >= 0)) throw config_error("synth: volatility must be >= 0");
  if (!(correlation >= 0.0 && correlation <= 1.0)) {
    throw config_error("synth: correlation must lie in [0, 1]");
  }
  if (!(start_price > 0) || !(base_volume > 0)) {
    throw config_error("synth: start price and base volume must be > 0");
  }
  if (!drift.empty() && static_cast<int>(drift.size()) != 1 &&
      static_cast<int>(drift.size()) != assets) {
    throw config_error("synth: drift needs one value or one per asset");
  }
}

std::vector<OhlcvSeries> generate_synthetic_market(const SynthSpec& spec, Rng& rng) {
  spec.validate();
  const int m = spec.assets;

  auto drift_of = [&](int a) {
    if (spec.drift.empty()) return 0.0;
    if (spec.drift.size() == 1) return spec.drift[0];
    return spec.drift[static_cast<size_t>(a)];
  };

  std::vector<OhlcvSeries> market(static_cast<size_t>(m));
  for (int a = 0; a < m; ++a) {
    market[static_cast<size_t>(a)].asset_id = "asset" + std::to_string(a + 1);
    market[static_cast<size_t>(a)].rows.reserve(static_cast<size_t>(spec.days));
  }

  // Equicorrelation through one market factor:
  // z_i = sqrt(rho) g + sqrt(1-rho) e_i.
  const double w_common = std::sqrt(spec.correlation);
  const double w_own = std::sqrt(1.0 - spec.correlation);

  std::vector<double> prev_close(static_cast<size_t>(m), spec.start_price);
  Date date = day_of_week(spec.start_date) == 0 || day_of_week(spec.start_date) == 6
                  ? next_weekday(spec.start_date)
                  : spec.start_date;

  for (int t = 0; t < spec.days; ++t) {
    const double common = rng.normal();
    for (int a = 0; a < m; ++a) {
      const double z = w_common * common + w_own * rng.normal();
      const double ret = drift_of(a) + spec.volatility * z;
      const double open = prev_close[static_cast<size_t>(a)];
      const double close = open * std::exp(ret);
      // Wicks scale with the volatility so a zero-volatility market is
      // exactly flat.
      const double wick_high = spec.volatility * std::abs(rng.normal());
      const double wick_low = std::min(spec.volatility * std::abs(rng.normal()), 0.5);
      OhlcvBar bar;
      bar.date = date;
      bar.open = open;
      bar.close = close;
      bar.high = std::max(open, close) * (1.0 + wick_high);
      bar.low = std::min(open, close) * (1.0 - wick_low);
      bar.volume = std::floor(spec.base_volume * (1.0 + rng.uniform()));
      market[static_cast<size_t>(a)].rows.push_back(bar);
      prev_close[static_cast<size_t>(a)] = close;
    }
    date = next_weekday(date);
  }

  for (auto& s : market) s.validate();
  return market;
}

}  // namespace gfolio
