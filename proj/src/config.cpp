#include "gfolio/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace gfolio {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t");
  return s.substr(first, last - first + 1);
}

int parse_int(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const int x = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return x;
  } catch (const std::exception&) {
    throw config_error("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw config_error("config: key '" + key + "' expects true/false, got '" + v + "'");
}

std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream is(v);
  std::string item;
  while (std::getline(is, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

Date parse_date_value(const std::string& v, const std::string& key) {
  try {
    return Date::parse(v);
  } catch (const data_error& e) {
    throw config_error("config: key '" + key + "': " + e.what());
  }
}

}  // namespace

void RunConfig::validate() const {
  indicators.validate();
  if (window < 3) throw config_error("config: features.window must be >= 3");
  if (rsae_epochs < 0) throw config_error("config: features.rsae_epochs must be >= 0");
  if (rsae_batch < 1) throw config_error("config: features.rsae_batch must be >= 1");
  if (!(rsae_learning_rate > 0)) throw config_error("config: features.rsae_learning_rate must be > 0");
  if (corr_window < 3) throw config_error("config: graph.corr_window must be >= 3");
  if (cheb_order < 1) throw config_error("config: graph.cheb_order must be >= 1");
  if (!(kappa > 0)) throw config_error("config: agent.kappa must be > 0");
  if (!(gamma >= 0 && gamma <= 1)) throw config_error("config: agent.gamma must lie in [0, 1]");
  if (!(actor_lr > 0) || !(critic_lr > 0)) throw config_error("config: learning rates must be > 0");
  if (!(commission_sell >= 0 && commission_sell < 1) || !(commission_buy >= 0 && commission_buy < 1)) {
    throw config_error("config: commissions must lie in [0, 1)");
  }
  if (!(initial_value > 0)) throw config_error("config: trading.initial_value must be > 0");
  if (epochs < 0 || batches_per_epoch < 1) {
    throw config_error("config: train.epochs must be >= 0 and train.batches_per_epoch >= 1");
  }
  if (batch_span < 2) throw config_error("config: train.batch_span must be >= 2");
  if (backtest_days < 0) throw config_error("config: backtest.days must be >= 0");
  if (!(cvar_alpha > 0 && cvar_alpha < 1)) throw config_error("config: backtest.cvar_alpha must lie in (0, 1)");
  if (synth_assets < 1) throw config_error("config: synth.assets must be >= 1");
  if (synth_days < 1) throw config_error("config: synth.days must be >= 1");
  if (!(synth_volatility >= 0)) throw config_error("config: synth.volatility must be >= 0");
  if (!(synth_correlation >= 0.0 && synth_correlation <= 1.0)) {
    throw config_error("config: synth.correlation must lie in [0, 1]");
  }
  if (!(synth_start_price > 0) || !(synth_base_volume > 0)) {
    throw config_error("config: synth.start_price and synth.base_volume must be > 0");
  }
  if (!synth_drift.empty() && static_cast<int>(synth_drift.size()) != 1 &&
      static_cast<int>(synth_drift.size()) != synth_assets) {
    throw config_error("config: synth.drift needs one value or one per asset");
  }
  if (split_id.empty() == !split_dates.has_value()) {
    // exactly one of the two must be provided once data commands run; both
    // empty is allowed for synth-only configs.
    if (!split_id.empty() && split_dates.has_value()) {
      throw config_error("config: give either data.split or explicit split dates, not both");
    }
  }
  Date::parse(synth_start_date);
}

DatasetSplit RunConfig::resolve_split(const Panel& panel) const {
  if (!split_id.empty()) return make_split(panel, split_id);
  if (split_dates) return make_split(panel, *split_dates);
  throw config_error("config: no split given (set data.split or the four explicit dates)");
}

PipelineOptions RunConfig::pipeline_options() const {
  PipelineOptions p;
  p.window = window;
  p.corr_window = corr_window;
  p.corr_field = corr_field;
  p.fees = CommissionSchedule{commission_sell, commission_buy};
  p.initial_value = initial_value;
  return p;
}

TrainOptions RunConfig::train_options() const {
  TrainOptions t;
  t.rsae_epochs = rsae_epochs;
  t.rsae_batch = rsae_batch;
  t.epochs = epochs;
  t.batches_per_epoch = batches_per_epoch;
  t.batch_span = batch_span;
  return t;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;

  // Explicit split dates accumulate here.
  std::optional<Date> train_start, train_end, test_start, test_end;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        throw config_error(origin + ":" + std::to_string(line_no) + ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw config_error(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;

    if (full == "data.dir") cfg.data_dir = value;
    else if (full == "data.assets") cfg.assets = parse_list(value);
    else if (full == "data.split") cfg.split_id = value;
    else if (full == "data.train_start") train_start = parse_date_value(value, full);
    else if (full == "data.train_end") train_end = parse_date_value(value, full);
    else if (full == "data.test_start") test_start = parse_date_value(value, full);
    else if (full == "data.test_end") test_end = parse_date_value(value, full);
    else if (full == "indicators.atr_window") cfg.indicators.atr_window = parse_int(value, full);
    else if (full == "indicators.cci_window") cfg.indicators.cci_window = parse_int(value, full);
    else if (full == "indicators.ema_window") cfg.indicators.ema_window = parse_int(value, full);
    else if (full == "indicators.hma_window") cfg.indicators.hma_window = parse_int(value, full);
    else if (full == "indicators.momentum_window") cfg.indicators.momentum_window = parse_int(value, full);
    else if (full == "indicators.demand_window") cfg.indicators.demand_window = parse_int(value, full);
    else if (full == "indicators.csi_scale") cfg.indicators.csi_scale = parse_double(value, full);
    else if (full == "features.window") cfg.window = parse_int(value, full);
    else if (full == "features.rsae_epochs") cfg.rsae_epochs = parse_int(value, full);
    else if (full == "features.rsae_batch") cfg.rsae_batch = parse_int(value, full);
    else if (full == "features.rsae_learning_rate") cfg.rsae_learning_rate = parse_double(value, full);
    else if (full == "graph.corr_window") cfg.corr_window = parse_int(value, full);
    else if (full == "graph.cheb_order") cfg.cheb_order = parse_int(value, full);
    else if (full == "graph.corr_field") cfg.corr_field = parse_corr_field(value);
    else if (full == "agent.kappa") cfg.kappa = parse_double(value, full);
    else if (full == "agent.gamma") cfg.gamma = parse_double(value, full);
    else if (full == "agent.actor_lr") cfg.actor_lr = parse_double(value, full);
    else if (full == "agent.critic_lr") cfg.critic_lr = parse_double(value, full);
    else if (full == "agent.critic_sees_weights") cfg.critic_sees_weights = parse_bool(value, full);
    else if (full == "trading.commission_sell") cfg.commission_sell = parse_double(value, full);
    else if (full == "trading.commission_buy") cfg.commission_buy = parse_double(value, full);
    else if (full == "trading.initial_value") cfg.initial_value = parse_double(value, full);
    else if (full == "train.epochs") cfg.epochs = parse_int(value, full);
    else if (full == "train.batches_per_epoch") cfg.batches_per_epoch = parse_int(value, full);
    else if (full == "train.batch_span") cfg.batch_span = parse_int(value, full);
    else if (full == "backtest.start_date") cfg.backtest_start = parse_date_value(value, full);
    else if (full == "backtest.days") cfg.backtest_days = parse_int(value, full);
    else if (full == "backtest.cvar_alpha") cfg.cvar_alpha = parse_double(value, full);
    else if (full == "backtest.benchmark") cfg.benchmark_csv = value;
    else if (full == "backtest.checkpoint") cfg.checkpoint = value;
    else if (full == "synth.assets") cfg.synth_assets = parse_int(value, full);
    else if (full == "synth.days") cfg.synth_days = parse_int(value, full);
    else if (full == "synth.drift") {
      cfg.synth_drift.clear();
      for (const auto& item : parse_list(value)) cfg.synth_drift.push_back(parse_double(item, full));
    } else if (full == "synth.volatility") cfg.synth_volatility = parse_double(value, full);
    else if (full == "synth.correlation") cfg.synth_correlation = parse_double(value, full);
    else if (full == "synth.start_price") cfg.synth_start_price = parse_double(value, full);
    else if (full == "synth.base_volume") cfg.synth_base_volume = parse_double(value, full);
    else if (full == "synth.start_date") cfg.synth_start_date = value;
    else if (full == "run.seed") cfg.seed = static_cast<std::uint64_t>(std::stoull(value));
    else if (full == "run.out_dir") cfg.out_dir = value;
    else {
      throw config_error(origin + ":" + std::to_string(line_no) + ": unknown key '" + full + "'");
    }
  }

  if (train_start || train_end || test_start || test_end) {
    if (!(train_start && train_end && test_start && test_end)) {
      throw config_error(origin + ": explicit split needs all four of data.train_start, "
                         "data.train_end, data.test_start, data.test_end");
    }
    DatasetSplit s{*train_start, *train_end, *test_start, *test_end};
    s.validate();
    cfg.split_dates = s;
  }
  cfg.validate();
  return cfg;
}

std::string effective_config_text(const RunConfig& c) {
  std::ostringstream os;
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  os << "[data]\n";
  os << "dir = " << c.data_dir << "\n";
  os << "assets = ";
  for (size_t i = 0; i < c.assets.size(); ++i) os << (i ? "," : "") << c.assets[i];
  os << "\n";
  if (!c.split_id.empty()) os << "split = " << c.split_id << "\n";
  if (c.split_dates) {
    os << "train_start = " << c.split_dates->train_start.str() << "\n";
    os << "train_end = " << c.split_dates->train_end.str() << "\n";
    os << "test_start = " << c.split_dates->test_start.str() << "\n";
    os << "test_end = " << c.split_dates->test_end.str() << "\n";
  }
  os << "\n[indicators]\n";
  os << "atr_window = " << c.indicators.atr_window << "\n";
  os << "cci_window = " << c.indicators.cci_window << "\n";
  os << "ema_window = " << c.indicators.ema_window << "\n";
  os << "hma_window = " << c.indicators.hma_window << "\n";
  os << "momentum_window = " << c.indicators.momentum_window << "\n";
  os << "demand_window = " << c.indicators.demand_window << "\n";
  os << "csi_scale = " << num(c.indicators.csi_scale) << "\n";
  os << "\n[features]\n";
  os << "window = " << c.window << "\n";
  os << "rsae_epochs = " << c.rsae_epochs << "\n";
  os << "rsae_batch = " << c.rsae_batch << "\n";
  os << "rsae_learning_rate = " << num(c.rsae_learning_rate) << "\n";
  os << "\n[graph]\n";
  os << "corr_window = " << c.corr_window << "\n";
  os << "cheb_order = " << c.cheb_order << "\n";
  os << "corr_field = " << corr_field_name(c.corr_field) << "\n";
  os << "\n[agent]\n";
  os << "kappa = " << num(c.kappa) << "\n";
  os << "gamma = " << num(c.gamma) << "\n";
  os << "actor_lr = " << num(c.actor_lr) << "\n";
  os << "critic_lr = " << num(c.critic_lr) << "\n";
  os << "critic_sees_weights = " << (c.critic_sees_weights ? "true" : "false") << "\n";
  os << "\n[trading]\n";
  os << "commission_sell = " << num(c.commission_sell) << "\n";
  os << "commission_buy = " << num(c.commission_buy) << "\n";
  os << "initial_value = " << num(c.initial_value) << "\n";
  os << "\n[train]\n";
  os << "epochs = " << c.epochs << "\n";
  os << "batches_per_epoch = " << c.batches_per_epoch << "\n";
  os << "batch_span = " << c.batch_span << "\n";
  os << "\n[backtest]\n";
  if (c.backtest_start) os << "start_date = " << c.backtest_start->str() << "\n";
  os << "days = " << c.backtest_days << "\n";
  os << "cvar_alpha = " << num(c.cvar_alpha) << "\n";
  if (!c.benchmark_csv.empty()) os << "benchmark = " << c.benchmark_csv << "\n";
  if (!c.checkpoint.empty()) os << "checkpoint = " << c.checkpoint << "\n";
  os << "\n[synth]\n";
  os << "assets = " << c.synth_assets << "\n";
  os << "days = " << c.synth_days << "\n";
  if (!c.synth_drift.empty()) {
    os << "drift = ";
    for (size_t i = 0; i < c.synth_drift.size(); ++i) os << (i ? "," : "") << num(c.synth_drift[i]);
    os << "\n";
  }
  os << "volatility = " << num(c.synth_volatility) << "\n";
  os << "correlation = " << num(c.synth_correlation) << "\n";
  os << "start_price = " << num(c.synth_start_price) << "\n";
  os << "base_volume = " << num(c.synth_base_volume) << "\n";
  os << "start_date = " << c.synth_start_date << "\n";
  os << "\n[run]\n";
  os << "seed = " << c.seed << "\n";
  os << "out_dir = " << c.out_dir << "\n";
  return os.str();
}

}  // namespace gfolio
