#include "gfolio/commands.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "gfolio/backtest.hpp"
#include "gfolio/checkpoint.hpp"
#include "gfolio/metrics.hpp"
#include "gfolio/synth.hpp"

namespace gfolio {

namespace fs = std::filesystem;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write '" + path + "'");
  out << text;
}

void prepare_out_dir(const RunConfig& config) {
  fs::create_directories(config.out_dir);
  write_text((fs::path(config.out_dir) / "effective_config.txt").string(),
             effective_config_text(config));
}

std::vector<OhlcvSeries> load_assets(const RunConfig& config) {
  if (config.data_dir.empty()) throw config_error("data.dir is not set");
  if (!fs::exists(config.data_dir)) {
    throw data_error("data.dir '" + config.data_dir + "' does not exist");
  }
  std::vector<std::string> names = config.assets;
  if (names.empty()) {
    for (const auto& entry : fs::directory_iterator(config.data_dir)) {
      if (entry.path().extension() == ".csv") names.push_back(entry.path().stem().string());
    }
    std::sort(names.begin(), names.end());
  }
  if (names.empty()) throw data_error("no csv files under '" + config.data_dir + "'");
  std::vector<OhlcvSeries> series;
  series.reserve(names.size());
  for (const auto& name : names) {
    series.push_back(load_csv((fs::path(config.data_dir) / (name + ".csv")).string(), name));
  }
  return series;
}

Panel load_panel(const RunConfig& config) {
  return Panel(load_assets(config), config.indicators);
}

Agent make_agent(const RunConfig& config, int num_assets, Rng& rng) {
  AgentConfig ac;
  ac.num_assets = num_assets;
  ac.window = config.window;
  ac.cheb_order = config.cheb_order;
  ac.kappa = config.kappa;
  ac.gamma = config.gamma;
  ac.actor_lr = config.actor_lr;
  ac.critic_lr = config.critic_lr;
  ac.critic_sees_weights = config.critic_sees_weights;
  return Agent(ac, rng);
}

std::string default_checkpoint_path(const RunConfig& config) {
  if (!config.checkpoint.empty()) return config.checkpoint;
  return (fs::path(config.out_dir) / "checkpoint.txt").string();
}

std::vector<double> benchmark_returns(const RunConfig& config,
                                      const std::vector<Date>& dates) {
  if (config.benchmark_csv.empty()) return {};
  const OhlcvSeries bench = load_csv(config.benchmark_csv);
  std::vector<double> out;
  out.reserve(dates.size());
  size_t k = 0;
  for (const Date& d : dates) {
    while (k < bench.rows.size() && bench.rows[k].date < d) ++k;
    if (k == bench.rows.size() || !(bench.rows[k].date == d) || k == 0) {
      throw data_error("benchmark '" + config.benchmark_csv + "' does not cover " + d.str());
    }
    out.push_back(std::log(bench.rows[k].close / bench.rows[k - 1].close));
  }
  return out;
}

}  // namespace

int cmd_ingest(const RunConfig& config, std::ostream& out) {
  prepare_out_dir(config);
  const Panel panel = load_panel(config);
  out << "panel: " << panel.num_assets() << " assets, " << panel.num_days()
      << " aligned trading days (" << panel.date(0).str() << " .. "
      << panel.date(panel.num_days() - 1).str() << ")\n";
  for (int a = 0; a < panel.num_assets(); ++a) {
    const auto& ind = panel.indicators(a);
    out << "  " << panel.assets()[static_cast<size_t>(a)] << ": "
        << panel.series(a).size() << " rows, indicator warm-up " << ind.max_warmup()
        << " rows\n";
  }
  out << "indicator warm-up (rows before the first fully defined day): "
      << panel.indicator_warmup() << "\n";
  out << "first usable window row for window=" << config.window << ": "
      << first_window_row(panel, config.window) << "\n";
  if (!config.split_id.empty() || config.split_dates) {
    const DatasetSplit split = config.resolve_split(panel);
    const SplitIndices idx = locate_split(panel, split);
    out << "split: train rows [" << idx.train_first << ", " << idx.train_last << "], test rows ["
        << idx.test_first << ", " << idx.test_last << "]\n";
  }
  return kExitOk;
}

int cmd_synth(const RunConfig& config, std::ostream& out) {
  prepare_out_dir(config);
  SynthSpec spec;
  spec.assets = config.synth_assets;
  spec.days = config.synth_days;
  spec.drift = config.synth_drift;
  spec.volatility = config.synth_volatility;
  spec.correlation = config.synth_correlation;
  spec.start_price = config.synth_start_price;
  spec.base_volume = config.synth_base_volume;
  spec.start_date = Date::parse(config.synth_start_date);

  Rng rng(config.seed);
  const auto market = generate_synthetic_market(spec, rng);
  const fs::path dir = config.data_dir.empty() ? fs::path(config.out_dir) / "data"
                                               : fs::path(config.data_dir);
  fs::create_directories(dir);
  for (const auto& series : market) {
    const std::string path = (dir / (series.asset_id + ".csv")).string();
    write_csv(path, series);
    out << "wrote " << path << " (" << series.size() << " rows)\n";
  }
  return kExitOk;
}

int cmd_train(const RunConfig& config, std::ostream& out) {
  prepare_out_dir(config);
  const Panel panel = load_panel(config);
  const DatasetSplit split = config.resolve_split(panel);

  Rng rng(config.seed);
  RsaeModel rsae(rng, config.rsae_learning_rate);
  Agent agent = make_agent(config, panel.num_assets(), rng);

  const std::string log_path = (fs::path(config.out_dir) / "train_log.csv").string();
  std::ofstream log(log_path);
  if (!log) throw data_error("cannot write '" + log_path + "'");
  log << "batch,td_error,critic_loss,actor_grad_norm,reward\n";

  TrainResult result;
  try {
    result = train_offline(panel, split, rsae, agent, config.pipeline_options(),
                           config.train_options(), rng);
  } catch (const numeric_error&) {
    // Keep the partial log on a numeric abort.
    log.flush();
    throw;
  }

  char buf[160];
  for (const auto& b : result.batches) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n", b.batch, b.mean_td_error,
                  b.mean_critic_loss, b.mean_actor_grad_norm, b.reward);
    log << buf;
  }
  log.flush();

  const std::string ckpt = default_checkpoint_path(config);
  fs::create_directories(fs::path(ckpt).parent_path().empty() ? "." : fs::path(ckpt).parent_path());
  save_checkpoint(ckpt, {{"rsae", &rsae.params()},
                         {"actor", &agent.actor_params()},
                         {"critic", &agent.critic_params()}});

  out << "autoencoder loss: " << result.rsae_initial_loss << " -> " << result.rsae_final_loss
      << " over " << config.rsae_epochs << " epochs\n";
  out << "trained " << result.batches.size() << " batches of " << config.batch_span
      << " days; diagnostics in " << log_path << "\n";
  out << "checkpoint written to " << ckpt << "\n";
  return kExitOk;
}

int cmd_backtest(const RunConfig& config, const std::string& checkpoint_path, std::ostream& out) {
  prepare_out_dir(config);
  const Panel panel = load_panel(config);
  const DatasetSplit split = config.resolve_split(panel);
  const SplitIndices idx = locate_split(panel, split);

  Rng rng(config.seed);
  RsaeModel rsae(rng, config.rsae_learning_rate);
  Agent agent = make_agent(config, panel.num_assets(), rng);
  const std::string ckpt = checkpoint_path.empty() ? default_checkpoint_path(config) : checkpoint_path;
  load_checkpoint(ckpt, {{"rsae", &rsae.params()},
                         {"actor", &agent.actor_params()},
                         {"critic", &agent.critic_params()}});

  int start_row = idx.test_first;
  if (config.backtest_start) {
    const auto row = panel.first_at_or_after(*config.backtest_start);
    if (!row) throw data_error("backtest start date beyond the panel");
    start_row = *row;
  }
  start_row = std::max(start_row, first_observable_row(panel, config.pipeline_options()));
  int days = idx.test_last - start_row + 1;
  if (config.backtest_days > 0) days = std::min(days, config.backtest_days);
  if (days < 1) throw data_error("backtest: empty test range after alignment");

  OnlineOptions online;
  online.cvar_alpha = config.cvar_alpha;
  {
    std::vector<Date> dates;
    dates.reserve(static_cast<size_t>(days));
    for (int t = start_row; t < start_row + days; ++t) dates.push_back(panel.date(t));
    online.benchmark_returns = benchmark_returns(config, dates);
  }

  const EpisodeReport report = run_online(panel, start_row, days, rsae, agent,
                                          config.pipeline_options(), online, rng);

  write_report_csv((fs::path(config.out_dir) / "report.csv").string(), report);
  write_weights_csv((fs::path(config.out_dir) / "weights.csv").string(), report, panel.assets());
  write_metrics_txt((fs::path(config.out_dir) / "metrics.txt").string(), report);

  char buf[128];
  std::snprintf(buf, sizeof(buf), "backtest: %d days, roi %.2f%%, mdd %.2f%%\n", days,
                report.roi_pct, report.mdd_pct);
  out << buf;
  out << "reports in " << config.out_dir << "\n";
  return kExitOk;
}

int cmd_report(const std::string& report_dir, double cvar_alpha, std::ostream& out) {
  const std::string path = (fs::path(report_dir) / "report.csv").string();
  std::ifstream in(path);
  if (!in) throw data_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != "date,value,roi_to_date_pct") {
    throw data_error("'" + path + "': unexpected header");
  }
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos) {
      throw data_error("'" + path + "': malformed row '" + line + "'");
    }
    values.push_back(std::stod(line.substr(c1 + 1, c2 - c1 - 1)));
  }
  if (values.size() < 2) throw data_error("'" + path + "': need at least two days");

  std::vector<double> returns(values.size() - 1);
  for (size_t i = 1; i < values.size(); ++i) returns[i - 1] = std::log(values[i] / values[i - 1]);
  std::vector<double> losses(returns.size());
  for (size_t i = 0; i < returns.size(); ++i) losses[i] = -returns[i];
  const std::vector<double> zeros(returns.size(), 0.0);

  char buf[128];
  std::snprintf(buf, sizeof(buf), "days=%zu\n", values.size());
  out << buf;
  std::snprintf(buf, sizeof(buf), "final_value=%.6f\n", values.back());
  out << buf;
  std::snprintf(buf, sizeof(buf), "mdd_pct=%.6f\n", max_drawdown(values) * 100.0);
  out << buf;
  try {
    std::snprintf(buf, sizeof(buf), "sharpe=%.6f\n", sharpe_ratio(returns, zeros));
  } catch (const numeric_error&) {
    std::snprintf(buf, sizeof(buf), "sharpe=nan\n");
  }
  out << buf;
  const TailRisk tail = cvar(losses, cvar_alpha);
  std::snprintf(buf, sizeof(buf), "var=%.6f\ncvar=%.6f\n", tail.var, tail.cvar);
  out << buf;
  return kExitOk;
}

int run_command(const std::string& name, const std::function<void()>& body, std::ostream& err) {
  try {
    body();
    return kExitOk;
  } catch (const config_error& e) {
    err << name << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const data_error& e) {
    err << name << ": " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << name << ": " << e.what() << "\n";
    return kExitNumeric;
  }
}

}  // namespace gfolio
