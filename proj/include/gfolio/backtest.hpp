#pragma once

#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gfolio/actor_critic.hpp"
#include "gfolio/graph.hpp"
#include "gfolio/metrics.hpp"
#include "gfolio/normalize.hpp"
#include "gfolio/panel.hpp"
#include "gfolio/rsae.hpp"

namespace gfolio {

// Pipeline knobs shared by offline training and the online backtest.
struct PipelineOptions {
  int window = 30;
  int corr_window = 10;
  CorrField corr_field = CorrField::Close;
  CommissionSchedule fees;
  double initial_value = 1.0;
};

// One trading day as the learners see it. The normalized window (not the
// latent code) is stored so replays re-encode through the current
// autoencoder weights.
struct DayRecord {
  Date date;
  NormalizedWindow window;
  AssetGraph graph;
  PriceRelative price_relative;
};

// Sliding store of the last ten days plus the current one; online updates
// train on exactly this span.
class OnlineBuffer {
 public:
  static constexpr size_t kDefaultCapacity = 11;

  explicit OnlineBuffer(size_t capacity = kDefaultCapacity);

  void push(DayRecord record);
  size_t size() const { return records_.size(); }
  size_t capacity() const { return capacity_; }
  const DayRecord& operator[](size_t i) const { return records_[i]; }
  const Date& newest_date() const;

 private:
  size_t capacity_;
  std::deque<DayRecord> records_;
};

// First panel row where a full observation (feature window plus correlation
// window) exists.
int first_observable_row(const Panel& panel, const PipelineOptions& options);

// Builds the day-t observation: normalized window -> latent, plus the
// correlation graph ending at t.
Observation make_observation(const Panel& panel, int t, const RsaeModel& rsae,
                             const PipelineOptions& options);
DayRecord make_day_record(const Panel& panel, int t, const PipelineOptions& options);

struct TrainOptions {
  int rsae_epochs = 30;
  int rsae_batch = 32;
  int epochs = 50;
  int batches_per_epoch = 64;
  int batch_span = 90;  // consecutive days per training batch
};

struct BatchDiagnostics {
  int batch = 0;
  double mean_td_error = 0;
  double mean_critic_loss = 0;
  double mean_actor_grad_norm = 0;
  double reward = 0;  // episode reward of the rolled span
};

struct TrainResult {
  double rsae_initial_loss = 0;
  double rsae_final_loss = 0;
  std::vector<BatchDiagnostics> batches;
};

// Offline phase: fits the autoencoder on every training-range window, then
// runs online stochastic batching: each batch replays a uniformly chosen
// span of `batch_span` consecutive training days from an all-cash start,
// sampling actions from the policy and applying one train_step per day.
TrainResult train_offline(const Panel& panel, const DatasetSplit& split, RsaeModel& rsae,
                          Agent& agent, const PipelineOptions& pipeline,
                          const TrainOptions& options, Rng& rng);

struct EpisodeReport {
  std::vector<Date> dates;
  std::vector<double> values;                  // portfolio value per day
  std::vector<double> log_returns;             // per-day logarithmic returns
  std::vector<Eigen::VectorXd> weight_history; // cash + assets per day
  double initial_value = 1.0;
  double roi_pct = 0;
  double mdd_pct = 0;
  std::optional<double> sharpe;  // empty when excess volatility is zero
  double var = 0;
  double cvar = 0;
  std::map<int, double> roi_at_pct;  // 30/60/90-day marks when reached
};

struct OnlineOptions {
  double cvar_alpha = 0.95;
  // Daily benchmark returns aligned with the backtest days; zeros (risk-free
  // 0) when absent.
  std::vector<double> benchmark_returns;
  bool online_updates = true;
  // Invoked once per trading day after the buffer push, before any update;
  // lets tests audit buffer contents against the trading date.
  std::function<void(const OnlineBuffer&, const Date& trading_day)> day_observer;
};

// Walks the panel from `start_row` for `days` trading days: push the day
// into the buffer, update every network on the buffered span, act
// deterministically, settle the accounting. Appends each day to the offline
// store only after it has been traded.
EpisodeReport run_online(const Panel& panel, int start_row, int days, RsaeModel& rsae,
                         Agent& agent, const PipelineOptions& pipeline,
                         const OnlineOptions& options, Rng& rng);

// Serialization of a report (schemas documented in the README).
void write_report_csv(const std::string& path, const EpisodeReport& report);
void write_weights_csv(const std::string& path, const EpisodeReport& report,
                       const std::vector<std::string>& assets);
void write_metrics_txt(const std::string& path, const EpisodeReport& report);

}  // namespace gfolio
