#pragma once

#include <string>
#include <vector>

#include "gfolio/dates.hpp"
#include "gfolio/errors.hpp"

namespace gfolio {

struct OhlcvBar {
  Date date;
  double open = 0;
  double high = 0;
  double low = 0;
  double close = 0;
  double volume = 0;
};

// Daily bars for one asset, strictly increasing in date. Invariants enforced
// at load time: positive prices, high >= max(open, close), low <= min(open,
// close), non-negative volume.
struct OhlcvSeries {
  std::string asset_id;
  std::vector<OhlcvBar> rows;

  int size() const { return static_cast<int>(rows.size()); }
  void validate() const;
};

// Reads `date,open,high,low,close,volume` CSV (header required, UTF-8,
// decimal point). Errors carry the offending line number or date.
OhlcvSeries load_csv(const std::string& path, const std::string& asset_id = "");

void write_csv(const std::string& path, const OhlcvSeries& series);

}  // namespace gfolio
