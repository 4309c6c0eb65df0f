#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gfolio/backtest.hpp"
#include "gfolio/graph.hpp"
#include "gfolio/indicators.hpp"
#include "gfolio/panel.hpp"

namespace gfolio {

// Full run configuration with every default resolved. Parsed from a plain
// key=value file with [section] headers; unknown keys are rejected so typos
// cannot silently fall back to defaults.
struct RunConfig {
  // [data]
  std::string data_dir;
  std::vector<std::string> assets;          // csv stems under data_dir
  std::string split_id;                     // "test1".."test5", or empty
  std::optional<DatasetSplit> split_dates;  // explicit alternative

  // [indicators]
  IndicatorParams indicators;

  // [features]
  int window = 30;
  int rsae_epochs = 30;
  int rsae_batch = 32;
  double rsae_learning_rate = 1e-3;

  // [graph]
  int corr_window = 10;
  int cheb_order = 3;
  CorrField corr_field = CorrField::Close;

  // [agent]
  double kappa = 50.0;
  double gamma = 0.99;
  double actor_lr = 1e-4;
  double critic_lr = 1e-3;
  bool critic_sees_weights = false;

  // [trading]
  double commission_sell = 0.0025;
  double commission_buy = 0.0025;
  double initial_value = 1.0;

  // [train]
  int epochs = 50;
  int batches_per_epoch = 64;
  int batch_span = 90;

  // [backtest]
  std::optional<Date> backtest_start;  // default: test range start
  int backtest_days = 0;               // 0 = whole test range
  double cvar_alpha = 0.95;
  std::string benchmark_csv;  // optional OHLCV file; close-to-close log returns
  std::string checkpoint;     // default: <out_dir>/checkpoint.txt

  // [synth]
  int synth_assets = 5;
  int synth_days = 500;
  std::vector<double> synth_drift;  // per asset, or one value for all
  double synth_volatility = 0.01;
  double synth_correlation = 0.3;
  double synth_start_price = 100.0;
  double synth_base_volume = 1e6;
  std::string synth_start_date = "2015-01-02";

  // [run]
  std::uint64_t seed = 1;
  std::string out_dir = "out";

  void validate() const;
  DatasetSplit resolve_split(const Panel& panel) const;
  PipelineOptions pipeline_options() const;
  TrainOptions train_options() const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_text(const std::string& text, const std::string& origin = "<config>");

// Canonical echo of every resolved value, written next to each command's
// outputs.
std::string effective_config_text(const RunConfig& config);

}  // namespace gfolio
