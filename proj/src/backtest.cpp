#include "gfolio/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace gfolio {

OnlineBuffer::OnlineBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity_ < 1) throw config_error("OnlineBuffer: capacity must be >= 1");
}

void OnlineBuffer::push(DayRecord record) {
  if (!records_.empty() && !(records_.back().date < record.date)) {
    throw data_error("OnlineBuffer: pushed date " + record.date.str() +
                     " not after the buffered " + records_.back().date.str());
  }
  records_.push_back(std::move(record));
  if (records_.size() > capacity_) records_.pop_front();
}

const Date& OnlineBuffer::newest_date() const {
  if (records_.empty()) throw data_error("OnlineBuffer: empty");
  return records_.back().date;
}

int first_observable_row(const Panel& panel, const PipelineOptions& options) {
  int row = first_window_row(panel, options.window);
  const int corr_need =
      options.corr_field == CorrField::LogReturn ? options.corr_window : options.corr_window - 1;
  row = std::max(row, corr_need);
  return std::max(row, 1);  // price relative needs the previous close
}

Observation make_observation(const Panel& panel, int t, const RsaeModel& rsae,
                             const PipelineOptions& options) {
  const NormalizedWindow window = normalize_window(panel, t, options.window);
  const AssetGraph graph = build_graph(panel, t, options.corr_window, options.corr_field);
  return Observation{rsae_encode(rsae, window), graph.scaled_laplacian()};
}

DayRecord make_day_record(const Panel& panel, int t, const PipelineOptions& options) {
  if (t < 1) throw data_error("make_day_record: no previous close at row 0");
  const int m = panel.num_assets();
  Eigen::VectorXd v_t(m), v_prev(m);
  for (int a = 0; a < m; ++a) {
    v_t[a] = panel.close(a, t);
    v_prev[a] = panel.close(a, t - 1);
  }
  return DayRecord{panel.date(t), normalize_window(panel, t, options.window),
                   build_graph(panel, t, options.corr_window, options.corr_field),
                   PriceRelative::from_prices(v_t, v_prev)};
}

namespace {

PriceRelative price_relative_at(const Panel& panel, int t) {
  const int m = panel.num_assets();
  Eigen::VectorXd v_t(m), v_prev(m);
  for (int a = 0; a < m; ++a) {
    v_t[a] = panel.close(a, t);
    v_prev[a] = panel.close(a, t - 1);
  }
  return PriceRelative::from_prices(v_t, v_prev);
}

Observation observation_from_record(const DayRecord& record, const RsaeModel& rsae) {
  return Observation{rsae_encode(rsae, record.window), record.graph.scaled_laplacian()};
}

}  // namespace

TrainResult train_offline(const Panel& panel, const DatasetSplit& split, RsaeModel& rsae,
                          Agent& agent, const PipelineOptions& pipeline,
                          const TrainOptions& options, Rng& rng) {
  if (options.batch_span < 2) throw config_error("train_offline: batch span must be >= 2");
  const SplitIndices idx = locate_split(panel, split);
  const int t0 = std::max(first_observable_row(panel, pipeline), idx.train_first);
  const int last_start = idx.train_last - options.batch_span + 1;
  if (last_start < t0) {
    const int needed = t0 + options.batch_span - 1;
    throw data_error("train_offline: training range ends at row " + std::to_string(idx.train_last) +
                     " but a " + std::to_string(options.batch_span) +
                     "-day batch needs data through row " + std::to_string(needed) +
                     " (indicator warm-up plus feature window included)");
  }

  TrainResult result;

  // Autoencoder phase on the training range's per-day feature columns.
  {
    const Eigen::MatrixXd samples = day_feature_matrix(
        panel, std::max(panel.indicator_warmup() + 1, idx.train_first), idx.train_last);
    Rng rsae_rng = rng.child(1);
    const RsaeTrainResult r = rsae_train_samples(
        rsae, samples, {options.rsae_epochs, options.rsae_batch}, rsae_rng);
    result.rsae_initial_loss = r.initial_loss;
    result.rsae_final_loss = r.final_loss;
  }

  // Observations are frozen for the whole batching phase (the autoencoder no
  // longer moves offline), so build each day's once.
  std::vector<Observation> observations(static_cast<size_t>(idx.train_last + 1));
  std::vector<PriceRelative> relatives;
  relatives.reserve(static_cast<size_t>(idx.train_last + 1));
  for (int t = 0; t <= idx.train_last; ++t) {
    relatives.push_back(t >= 1 && t >= t0 ? price_relative_at(panel, t)
                                          : PriceRelative(Eigen::VectorXd::Ones(1)));
    if (t >= t0) observations[static_cast<size_t>(t)] = make_observation(panel, t, rsae, pipeline);
  }

  const int total_batches = options.epochs * options.batches_per_epoch;
  for (int batch = 0; batch < total_batches; ++batch) {
    const int start = static_cast<int>(rng.uniform_int(t0, last_start));

    PortfolioState portfolio =
        PortfolioState::initial(panel.num_assets(), pipeline.initial_value);
    AgentState state{observations[static_cast<size_t>(start)], portfolio.weights};
    ActionSample action = agent.act(state, rng);

    BatchDiagnostics diag;
    diag.batch = batch;
    std::vector<double> log_returns;
    log_returns.reserve(static_cast<size_t>(options.batch_span - 1));

    for (int t = start + 1; t < start + options.batch_span; ++t) {
      AgentState next_state{observations[static_cast<size_t>(t)], action.action};
      const StepResult step =
          step_value(portfolio, relatives[static_cast<size_t>(t)], action.action, pipeline.fees);
      portfolio = step.state;
      log_returns.push_back(step.log_return);

      const TrainDiagnostics td = agent.train_step(
          {state, action.action, action.log_prob, step.log_return, next_state});
      diag.mean_td_error += td.td_error;
      diag.mean_critic_loss += td.critic_loss;
      diag.mean_actor_grad_norm += td.actor_grad_norm;

      state = std::move(next_state);
      action = agent.act(state, rng);
    }

    const double steps = static_cast<double>(options.batch_span - 1);
    diag.mean_td_error /= steps;
    diag.mean_critic_loss /= steps;
    diag.mean_actor_grad_norm /= steps;
    diag.reward = episode_reward(log_returns, options.batch_span - 1);
    result.batches.push_back(diag);
  }
  return result;
}

EpisodeReport run_online(const Panel& panel, int start_row, int days, RsaeModel& rsae,
                         Agent& agent, const PipelineOptions& pipeline,
                         const OnlineOptions& options, Rng& rng) {
  if (days < 1) throw data_error("run_online: need at least one trading day");
  const int t0 = first_observable_row(panel, pipeline);
  if (start_row < t0) {
    throw data_error("run_online: start row " + std::to_string(start_row) +
                     " is before the first observable row " + std::to_string(t0));
  }
  if (start_row + days > panel.num_days()) {
    throw data_error("run_online: " + std::to_string(days) + " trading days from row " +
                     std::to_string(start_row) + " exceed the panel (" +
                     std::to_string(panel.num_days()) + " rows)");
  }
  if (!options.benchmark_returns.empty() &&
      static_cast<int>(options.benchmark_returns.size()) != days) {
    throw data_error("run_online: benchmark return series must cover all " +
                     std::to_string(days) + " days");
  }

  OnlineBuffer buffer;
  PortfolioState portfolio = PortfolioState::initial(panel.num_assets(), pipeline.initial_value);
  // Days become part of the offline store only after they have been traded.
  int offline_store_end = start_row - 1;

  EpisodeReport report;
  report.initial_value = pipeline.initial_value;

  for (int t = start_row; t < start_row + days; ++t) {
    buffer.push(make_day_record(panel, t, pipeline));
    // Causality: nothing buffered may postdate the trading day.
    if (panel.date(t) < buffer.newest_date()) {
      throw numeric_error("run_online: buffer holds data past the current day");
    }
    if (options.day_observer) options.day_observer(buffer, panel.date(t));

    if (options.online_updates) {
      // One optimizer pass of the autoencoder over the buffered columns.
      std::vector<NormalizedWindow> windows;
      windows.reserve(buffer.size());
      for (size_t i = 0; i < buffer.size(); ++i) windows.push_back(buffer[i].window);
      const Eigen::MatrixXd samples = collect_rsae_samples(windows);
      Rng pass_rng = rng.child(2);
      rsae_train_samples(rsae, samples,
                         {1, static_cast<int>(samples.cols())}, pass_rng);

      // One replay of the buffered span with sampled actions.
      if (buffer.size() >= 2) {
        PortfolioState replay =
            PortfolioState::initial(panel.num_assets(), pipeline.initial_value);
        AgentState state{observation_from_record(buffer[0], rsae), replay.weights};
        ActionSample action = agent.act(state, rng);
        for (size_t i = 1; i < buffer.size(); ++i) {
          AgentState next_state{observation_from_record(buffer[i], rsae), action.action};
          const StepResult step =
              step_value(replay, buffer[i].price_relative, action.action, pipeline.fees);
          replay = step.state;
          agent.train_step({state, action.action, action.log_prob, step.log_return, next_state});
          state = std::move(next_state);
          action = agent.act(state, rng);
        }
      }
    }

    // Deterministic action for the live portfolio.
    const DayRecord& today = buffer[buffer.size() - 1];
    AgentState live_state{observation_from_record(today, rsae), portfolio.weights};
    const WeightVector target = agent.mean_weights(live_state);
    const StepResult step = step_value(portfolio, today.price_relative, target, pipeline.fees);
    portfolio = step.state;

    report.dates.push_back(panel.date(t));
    report.values.push_back(portfolio.value);
    report.log_returns.push_back(step.log_return);
    report.weight_history.push_back(portfolio.weights.vec());

    offline_store_end = t;  // the traded day joins the offline dataset
  }
  (void)offline_store_end;

  report.roi_pct = (report.values.back() / report.initial_value - 1.0) * 100.0;
  report.mdd_pct = max_drawdown(report.values) * 100.0;
  for (int mark : {30, 60, 90}) {
    if (static_cast<int>(report.values.size()) >= mark) {
      report.roi_at_pct[mark] =
          (report.values[static_cast<size_t>(mark - 1)] / report.initial_value - 1.0) * 100.0;
    }
  }

  std::vector<double> benchmark = options.benchmark_returns;
  if (benchmark.empty()) benchmark.assign(report.log_returns.size(), 0.0);
  if (report.log_returns.size() >= 2) {
    try {
      report.sharpe = sharpe_ratio(report.log_returns, benchmark);
    } catch (const numeric_error&) {
      report.sharpe.reset();  // zero excess volatility
    }
  }
  std::vector<double> losses(report.log_returns.size());
  for (size_t i = 0; i < losses.size(); ++i) losses[i] = -report.log_returns[i];
  const TailRisk tail = cvar(losses, options.cvar_alpha);
  report.var = tail.var;
  report.cvar = tail.cvar;
  return report;
}

void write_report_csv(const std::string& path, const EpisodeReport& report) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write '" + path + "'");
  out << "date,value,roi_to_date_pct\n";
  char buf[128];
  for (size_t i = 0; i < report.dates.size(); ++i) {
    const double roi = (report.values[i] / report.initial_value - 1.0) * 100.0;
    std::snprintf(buf, sizeof(buf), "%s,%.17g,%.17g\n", report.dates[i].str().c_str(),
                  report.values[i], roi);
    out << buf;
  }
}

void write_weights_csv(const std::string& path, const EpisodeReport& report,
                       const std::vector<std::string>& assets) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write '" + path + "'");
  out << "date,cash";
  for (const auto& a : assets) out << "," << a;
  out << "\n";
  char buf[64];
  for (size_t i = 0; i < report.dates.size(); ++i) {
    out << report.dates[i].str();
    const Eigen::VectorXd& w = report.weight_history[i];
    for (Eigen::Index j = 0; j < w.size(); ++j) {
      std::snprintf(buf, sizeof(buf), ",%.17g", w[j]);
      out << buf;
    }
    out << "\n";
  }
}

void write_metrics_txt(const std::string& path, const EpisodeReport& report) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write '" + path + "'");
  char buf[128];
  std::snprintf(buf, sizeof(buf), "roi_pct=%.2f\n", report.roi_pct);
  out << buf;
  std::snprintf(buf, sizeof(buf), "mdd_pct=%.6f\n", report.mdd_pct);
  out << buf;
  if (report.sharpe) {
    std::snprintf(buf, sizeof(buf), "sharpe=%.6f\n", *report.sharpe);
  } else {
    std::snprintf(buf, sizeof(buf), "sharpe=nan\n");
  }
  out << buf;
  std::snprintf(buf, sizeof(buf), "var=%.6f\n", report.var);
  out << buf;
  std::snprintf(buf, sizeof(buf), "cvar=%.6f\n", report.cvar);
  out << buf;
  for (const auto& [mark, roi] : report.roi_at_pct) {
    std::snprintf(buf, sizeof(buf), "roi_%dd_pct=%.2f\n", mark, roi);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "days=%zu\n", report.dates.size());
  out << buf;
}

}  // namespace gfolio
