#include "gfolio/panel.hpp"

#include <algorithm>
#include <map>

namespace gfolio {

Panel::Panel(std::vector<OhlcvSeries> series, const IndicatorParams& params) {
  if (series.empty()) throw data_error("panel: empty asset set");
  for (auto& s : series) s.validate();

  // Common span across assets; every asset must carry exactly the same dates
  // inside it.
  Date lo = series.front().rows.front().date;
  Date hi = series.front().rows.back().date;
  for (const auto& s : series) {
    if (s.rows.empty()) throw data_error("panel: asset '" + s.asset_id + "' has no rows");
    lo = std::max(lo, s.rows.front().date);
    hi = std::min(hi, s.rows.back().date);
  }
  if (hi < lo) throw data_error("panel: assets share no common date span");

  auto in_span = [&](const Date& d) { return !(d < lo) && !(hi < d); };

  // Grid from the first asset, then exact comparison for the rest.
  for (const auto& bar : series.front().rows) {
    if (in_span(bar.date)) dates_.push_back(bar.date);
  }
  for (const auto& s : series) {
    size_t k = 0;
    for (const auto& bar : s.rows) {
      if (!in_span(bar.date)) continue;
      if (k >= dates_.size()) {
        throw data_error("panel: asset '" + s.asset_id + "' has extra date " + bar.date.str());
      }
      if (!(bar.date == dates_[k])) {
        const Date& expected = dates_[k];
        if (bar.date < expected) {
          throw data_error("panel: asset '" + series.front().asset_id + "' is missing date " +
                           bar.date.str() + " present in '" + s.asset_id + "'");
        }
        throw data_error("panel: asset '" + s.asset_id + "' is missing date " + expected.str());
      }
      ++k;
    }
    if (k != dates_.size()) {
      throw data_error("panel: asset '" + s.asset_id + "' is missing date " + dates_[k].str());
    }
  }

  // Indicators are computed on each full series, then rows trimmed to the
  // common span so warm-ups can use history before it.
  for (auto& s : series) {
    IndicatorSet ind = compute_indicators(s, params);
    int first = 0;
    while (first < s.size() && s.rows[static_cast<size_t>(first)].date < lo) ++first;
    const int count = static_cast<int>(dates_.size());

    IndicatorSet trimmed;
    trimmed.values = ind.values.middleRows(first, count);
    for (size_t c = 0; c < trimmed.warmup.size(); ++c) {
      trimmed.warmup[c] = std::max(0, ind.warmup[c] - first);
    }
    indicators_.push_back(std::move(trimmed));

    s.rows.erase(s.rows.begin(), s.rows.begin() + first);
    s.rows.resize(static_cast<size_t>(count));
    assets_.push_back(s.asset_id);
    series_.push_back(std::move(s));
  }
}

int Panel::indicator_warmup() const {
  int w = 0;
  for (const auto& ind : indicators_) w = std::max(w, ind.max_warmup());
  return w;
}

std::optional<int> Panel::find(const Date& d) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end() || !(*it == d)) return std::nullopt;
  return static_cast<int>(it - dates_.begin());
}

std::optional<int> Panel::first_at_or_after(const Date& d) const {
  auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.end()) return std::nullopt;
  return static_cast<int>(it - dates_.begin());
}

std::optional<int> Panel::last_at_or_before(const Date& d) const {
  auto it = std::upper_bound(dates_.begin(), dates_.end(), d);
  if (it == dates_.begin()) return std::nullopt;
  return static_cast<int>(it - dates_.begin()) - 1;
}

void DatasetSplit::validate() const {
  if (!(train_start < train_end)) {
    throw data_error("split: train start " + train_start.str() + " must precede train end " +
                     train_end.str());
  }
  if (!(test_start < test_end)) {
    throw data_error("split: test start " + test_start.str() + " must precede test end " +
                     test_end.str());
  }
  if (!(train_end < test_start)) {
    throw data_error("split: train end " + train_end.str() + " must precede test start " +
                     test_start.str() + " (leakage guard)");
  }
}

DatasetSplit table_split(const std::string& id) {
  static const std::map<std::string, DatasetSplit> kTable = {
      {"test1", {{2002, 1, 2}, {2009, 4, 16}, {2010, 3, 15}, {2010, 7, 21}}},
      {"test2", {{2002, 1, 2}, {2012, 12, 6}, {2013, 11, 4}, {2014, 3, 14}}},
      {"test3", {{2002, 1, 2}, {2016, 8, 1}, {2017, 6, 28}, {2017, 11, 2}}},
      {"test4", {{2002, 1, 2}, {2018, 10, 19}, {2019, 6, 9}, {2019, 10, 16}}},
      {"test5", {{2002, 1, 2}, {2019, 6, 23}, {2019, 11, 12}, {2020, 3, 24}}},
  };
  auto it = kTable.find(id);
  if (it == kTable.end()) {
    throw config_error("unknown split id '" + id + "' (expected test1..test5 or explicit dates)");
  }
  return it->second;
}

SplitIndices locate_split(const Panel& panel, const DatasetSplit& split) {
  split.validate();
  auto range = [&](const Date& a, const Date& b, const char* which) -> std::pair<int, int> {
    auto first = panel.first_at_or_after(a);
    auto last = panel.last_at_or_before(b);
    if (!first || !last || *last < *first) {
      throw data_error(std::string("split: no panel data in ") + which + " range " + a.str() +
                       " .. " + b.str());
    }
    return {*first, *last};
  };
  auto [tf, tl] = range(split.train_start, split.train_end, "train");
  auto [sf, sl] = range(split.test_start, split.test_end, "test");
  return {tf, tl, sf, sl};
}

DatasetSplit make_split(const Panel& panel, const std::string& table_id) {
  return make_split(panel, table_split(table_id));
}

DatasetSplit make_split(const Panel& panel, const DatasetSplit& explicit_dates) {
  locate_split(panel, explicit_dates);  // validates ordering and coverage
  return explicit_dates;
}

}  // namespace gfolio
