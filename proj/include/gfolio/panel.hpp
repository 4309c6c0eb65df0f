#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfolio/indicators.hpp"
#include "gfolio/ohlcv.hpp"

namespace gfolio {

// Aligned multi-asset view: one shared date grid, per-asset bars and
// indicator streams row-aligned to it. Alignment is strict; a date present
// for one asset and missing for another is an error, never imputed.
class Panel {
 public:
  Panel(std::vector<OhlcvSeries> series, const IndicatorParams& params);

  int num_assets() const { return static_cast<int>(series_.size()); }
  int num_days() const { return static_cast<int>(dates_.size()); }

  const std::vector<Date>& dates() const { return dates_; }
  const Date& date(int t) const { return dates_[static_cast<size_t>(t)]; }
  const std::vector<std::string>& assets() const { return assets_; }
  const OhlcvSeries& series(int asset) const { return series_[static_cast<size_t>(asset)]; }
  const IndicatorSet& indicators(int asset) const {
    return indicators_[static_cast<size_t>(asset)];
  }

  const OhlcvBar& bar(int asset, int t) const {
    return series_[static_cast<size_t>(asset)].rows[static_cast<size_t>(t)];
  }
  double close(int asset, int t) const { return bar(asset, t).close; }

  // First row at which every indicator of every asset is defined.
  int indicator_warmup() const;

  // Row index of the date, if present.
  std::optional<int> find(const Date& d) const;
  // First row with date >= d / last row with date <= d.
  std::optional<int> first_at_or_after(const Date& d) const;
  std::optional<int> last_at_or_before(const Date& d) const;

 private:
  std::vector<std::string> assets_;
  std::vector<Date> dates_;
  std::vector<OhlcvSeries> series_;
  std::vector<IndicatorSet> indicators_;
};

// Train/test date ranges; train must end strictly before test begins.
struct DatasetSplit {
  Date train_start, train_end;
  Date test_start, test_end;

  void validate() const;
};

// The five published train/test ranges, by id "test1".."test5".
DatasetSplit table_split(const std::string& id);

// Row index ranges of a split within a panel (inclusive bounds). Errors if a
// range contains no panel rows.
struct SplitIndices {
  int train_first, train_last;
  int test_first, test_last;
};
SplitIndices locate_split(const Panel& panel, const DatasetSplit& split);

// Resolves a split (by table id, or explicit dates), checks it against the
// panel and returns the validated ranges.
DatasetSplit make_split(const Panel& panel, const std::string& table_id);
DatasetSplit make_split(const Panel& panel, const DatasetSplit& explicit_dates);

}  // namespace gfolio
