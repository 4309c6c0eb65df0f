#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "gfolio/backtest.hpp"
#include "gfolio/synth.hpp"
#include "testutil.hpp"

using namespace gfolio;

namespace {

Panel synthetic_panel(int assets, int days, double vol, uint64_t seed, double corr = 0.2,
                      std::vector<double> drift = {}) {
  Rng rng(seed);
  SynthSpec spec;
  spec.assets = assets;
  spec.days = days;
  spec.volatility = vol;
  spec.correlation = corr;
  spec.drift = std::move(drift);
  return Panel(generate_synthetic_market(spec, rng), IndicatorParams{});
}

PipelineOptions small_pipeline(int window = 6, int corr_window = 5) {
  PipelineOptions p;
  p.window = window;
  p.corr_window = corr_window;
  return p;
}

DayRecord record_for(const Panel& panel, int t, const PipelineOptions& p) {
  return make_day_record(panel, t, p);
}

}  // namespace

TEST_CASE("online buffer: holds exactly the pushed days up to capacity 11") {
  const Panel panel = synthetic_panel(2, 90, 0.01, 5);
  const PipelineOptions pipe = small_pipeline();
  const int t0 = first_observable_row(panel, pipe);

  OnlineBuffer buffer;
  CHECK(buffer.capacity() == 11);

  for (int i = 0; i < 3; ++i) buffer.push(record_for(panel, t0 + i, pipe));
  REQUIRE(buffer.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(buffer[static_cast<size_t>(i)].date == panel.date(t0 + i));

  for (int i = 3; i < 15; ++i) buffer.push(record_for(panel, t0 + i, pipe));
  REQUIRE(buffer.size() == 11);
  for (int i = 0; i < 11; ++i) {
    CHECK(buffer[static_cast<size_t>(i)].date == panel.date(t0 + 4 + i));
  }

  // Out-of-order pushes are rejected.
  CHECK_THROWS_AS(buffer.push(record_for(panel, t0, pipe)), data_error);
}

TEST_CASE("max_drawdown: monotone, hand case, brute force") {
  const std::vector<double> up{1, 2, 3, 4, 5};
  CHECK(max_drawdown(up) == 0.0);

  const std::vector<double> curve{100, 120, 90, 130};
  CHECK(max_drawdown(curve) == doctest::Approx(0.25));

  Rng rng(7);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 2 + static_cast<int>(rng.uniform_int(0, 40));
    std::vector<double> c(static_cast<size_t>(n));
    for (auto& v : c) v = rng.uniform(10.0, 200.0);
    const double got = max_drawdown(c);
    // O(n^2) brute force over all peak/trough pairs.
    double want = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) want = std::max(want, (c[static_cast<size_t>(i)] - c[static_cast<size_t>(j)]) / c[static_cast<size_t>(i)]);
    }
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(got >= 0.0);
    CHECK(got <= 1.0);
  }

  CHECK_THROWS_AS(static_cast<void>(max_drawdown(std::vector<double>{})), data_error);
}

TEST_CASE("sharpe: hand arithmetic, scale invariance, degenerate error") {
  const std::vector<double> pf{0.01, 0.03};
  const std::vector<double> zero(2, 0.0);
  // mean 0.02, sample sd 0.01414..., ratio ~ 1.4142
  CHECK(sharpe_ratio(pf, zero) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 3 + static_cast<int>(rng.uniform_int(0, 20));
    std::vector<double> r(static_cast<size_t>(n)), b(static_cast<size_t>(n), 0.0);
    for (auto& v : r) v = rng.uniform(-0.05, 0.05);
    const double base = sharpe_ratio(r, b);
    const double k = rng.uniform(0.1, 9.0);
    std::vector<double> scaled = r;
    for (auto& v : scaled) v *= k;
    CHECK(sharpe_ratio(scaled, b) == doctest::Approx(base).epsilon(1e-12));
  }

  // Portfolio = benchmark + constant: zero volatility of the excess
  // (exactly representable values so the difference is bitwise constant).
  const std::vector<double> bench{0.25, 0.5, 0.75};
  const std::vector<double> shifted{0.5, 0.75, 1.0};
  CHECK_THROWS_AS(static_cast<void>(sharpe_ratio(shifted, bench)), numeric_error);
  CHECK_THROWS_AS(static_cast<void>(sharpe_ratio(pf, bench)), shape_error);
}

TEST_CASE("cvar: enumeration oracle and tail dominance") {
  std::vector<double> losses;
  for (int i = 1; i <= 100; ++i) losses.push_back(i);
  const TailRisk t = cvar(losses, 0.95);
  CHECK(t.var == 95.0);
  CHECK(t.cvar == doctest::Approx(97.5));

  const std::vector<double> flat(17, 3.25);
  const TailRisk f = cvar(flat, 0.9);
  CHECK(f.var == 3.25);
  CHECK(f.cvar == 3.25);

  Rng rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_int(0, 50));
    std::vector<double> sample(static_cast<size_t>(n));
    for (auto& v : sample) v = rng.uniform(-5, 5);
    const double alpha = rng.uniform(0.05, 0.99);
    const TailRisk got = cvar(sample, alpha);
    CHECK(got.cvar >= got.var);

    // Enumeration oracle.
    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    size_t rank = static_cast<size_t>(std::ceil(alpha * n));
    rank = std::clamp<size_t>(rank, 1, static_cast<size_t>(n));
    CHECK(got.var == sorted[rank - 1]);
    double mean = 0;
    for (size_t i = rank - 1; i < sorted.size(); ++i) mean += sorted[i];
    mean /= static_cast<double>(sorted.size() - rank + 1);
    CHECK(got.cvar == doctest::Approx(mean).epsilon(1e-12));
  }

  CHECK_THROWS_AS(static_cast<void>(cvar(std::vector<double>{}, 0.95)), data_error);
  CHECK_THROWS_AS(static_cast<void>(cvar(losses, 1.0)), numeric_error);
}

TEST_CASE("train_offline: zero batches leaves the agent untouched") {
  const Panel panel = synthetic_panel(3, 140, 0.01, 21);
  const PipelineOptions pipe = small_pipeline();
  const DatasetSplit split{panel.date(0), panel.date(99), panel.date(100),
                           panel.date(panel.num_days() - 1)};

  Rng rng(1);
  RsaeModel rsae(rng);
  AgentConfig ac;
  ac.num_assets = 3;
  ac.window = pipe.window;
  Agent agent(ac, rng);

  std::vector<Eigen::ArrayXd> before;
  for (size_t i = 0; i < agent.actor_params().size(); ++i) {
    before.push_back(agent.actor_params()[i].value.array());
  }

  TrainOptions opts;
  opts.rsae_epochs = 0;
  opts.epochs = 0;
  opts.batches_per_epoch = 1;
  opts.batch_span = 10;
  Rng train_rng(2);
  const TrainResult result = train_offline(panel, split, rsae, agent, pipe, opts, train_rng);
  CHECK(result.batches.empty());
  CHECK(result.rsae_final_loss == result.rsae_initial_loss);
  for (size_t i = 0; i < agent.actor_params().size(); ++i) {
    CHECK((agent.actor_params()[i].value.array() - before[i]).abs().maxCoeff() == 0.0);
  }
}

TEST_CASE("train_offline: insufficient history names the requirement") {
  const Panel panel = synthetic_panel(2, 70, 0.01, 22);
  const PipelineOptions pipe = small_pipeline();
  const DatasetSplit split{panel.date(0), panel.date(50), panel.date(51), panel.date(69)};
  Rng rng(1);
  RsaeModel rsae(rng);
  AgentConfig ac;
  ac.num_assets = 2;
  ac.window = pipe.window;
  Agent agent(ac, rng);
  TrainOptions opts;
  opts.batch_span = 90;  // larger than the training range
  Rng train_rng(2);
  CHECK_THROWS_AS(
      static_cast<void>(train_offline(panel, split, rsae, agent, pipe, opts, train_rng)),
      data_error);
}

TEST_CASE("train_offline: determinism - same seed, identical parameters") {
  auto run = [](uint64_t seed) {
    const Panel panel = synthetic_panel(2, 150, 0.015, 77);
    const PipelineOptions pipe = small_pipeline();
    const DatasetSplit split{panel.date(0), panel.date(119), panel.date(120), panel.date(149)};
    Rng rng(seed);
    RsaeModel rsae(rng);
    AgentConfig ac;
    ac.num_assets = 2;
    ac.window = pipe.window;
    ac.actor_lr = 1e-3;
    ac.critic_lr = 1e-3;
    Agent agent(ac, rng);
    TrainOptions opts;
    opts.rsae_epochs = 2;
    opts.epochs = 1;
    opts.batches_per_epoch = 3;
    opts.batch_span = 12;
    train_offline(panel, split, rsae, agent, pipe, opts, rng);
    Eigen::ArrayXd flat(agent.actor_params().num_values());
    Eigen::Index at = 0;
    for (size_t i = 0; i < agent.actor_params().size(); ++i) {
      const auto& v = agent.actor_params()[i].value.array();
      flat.segment(at, v.size()) = v;
      at += v.size();
    }
    return flat;
  };
  const Eigen::ArrayXd a = run(42);
  const Eigen::ArrayXd b = run(42);
  CHECK((a - b).abs().maxCoeff() == 0.0);
}

TEST_CASE("run_online: flat frictionless market keeps roi exactly zero") {
  const Panel panel = synthetic_panel(3, 120, 0.0, 31, 0.0);
  PipelineOptions pipe = small_pipeline();
  pipe.fees = CommissionSchedule{0.0, 0.0};

  Rng rng(3);
  RsaeModel rsae(rng);
  AgentConfig ac;
  ac.num_assets = 3;
  ac.window = pipe.window;
  ac.actor_lr = 1e-3;
  ac.critic_lr = 1e-3;
  Agent agent(ac, rng);

  const int start = first_observable_row(panel, pipe);
  OnlineOptions online;
  Rng run_rng(4);
  const EpisodeReport report = run_online(panel, start, 25, rsae, agent, pipe, online, run_rng);
  // Frictionless and flat: every mu is exactly 1, and the only value motion
  // left is the simplex sum's last-bit residue.
  CHECK(std::abs(report.roi_pct) < 1e-12);
  CHECK(std::abs(report.mdd_pct) < 1e-12);
  for (double v : report.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("run_online: accounting identity and simplex weights on a noisy market") {
  const Panel panel = synthetic_panel(3, 130, 0.02, 41);
  PipelineOptions pipe = small_pipeline();

  Rng rng(5);
  RsaeModel rsae(rng);
  AgentConfig ac;
  ac.num_assets = 3;
  ac.window = pipe.window;
  ac.actor_lr = 1e-3;
  ac.critic_lr = 1e-3;
  Agent agent(ac, rng);

  const int start = first_observable_row(panel, pipe);
  OnlineOptions online;
  Rng run_rng(6);
  const EpisodeReport report = run_online(panel, start, 30, rsae, agent, pipe, online, run_rng);

  REQUIRE(report.values.size() == 30);
  double log_sum = 0;
  for (double r : report.log_returns) log_sum += r;
  CHECK(report.values.back() ==
        doctest::Approx(report.initial_value * std::exp(log_sum)).epsilon(1e-9));
  for (const auto& w : report.weight_history) {
    CHECK(std::abs(w.sum() - 1.0) <= 1e-12);
    CHECK((w.array() >= 0).all());
  }
}

TEST_CASE("run_online: buffer causality observed across a whole backtest") {
  const Panel panel = synthetic_panel(2, 130, 0.015, 51);
  PipelineOptions pipe = small_pipeline();

  Rng rng(7);
  RsaeModel rsae(rng);
  AgentConfig ac;
  ac.num_assets = 2;
  ac.window = pipe.window;
  Agent agent(ac, rng);

  int days_seen = 0;
  OnlineOptions online;
  online.day_observer = [&](const OnlineBuffer& buffer, const Date& today) {
    ++days_seen;
    CHECK(buffer.size() <= buffer.capacity());
    for (size_t i = 0; i < buffer.size(); ++i) {
      CHECK_FALSE(today < buffer[i].date);  // nothing buffered postdates today
    }
    CHECK(buffer.newest_date() == today);
  };
  const int start = first_observable_row(panel, pipe);
  Rng run_rng(8);
  run_online(panel, start, 40, rsae, agent, pipe, online, run_rng);
  CHECK(days_seen == 40);
}

TEST_CASE("run_online: determinism of reports") {
  auto run = [](uint64_t seed) {
    const Panel panel = synthetic_panel(2, 120, 0.02, 61);
    PipelineOptions pipe = small_pipeline();
    Rng rng(seed);
    RsaeModel rsae(rng);
    AgentConfig ac;
    ac.num_assets = 2;
    ac.window = pipe.window;
    Agent agent(ac, rng);
    const int start = first_observable_row(panel, pipe);
    OnlineOptions online;
    Rng run_rng(seed + 1);
    return run_online(panel, start, 20, rsae, agent, pipe, online, run_rng);
  };
  const EpisodeReport a = run(9);
  const EpisodeReport b = run(9);
  REQUIRE(a.values.size() == b.values.size());
  for (size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
}

TEST_CASE("report files: write and parse back") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "gfolio_bt_tests";
  fs::create_directories(dir);

  EpisodeReport report;
  report.initial_value = 1.0;
  report.dates = {Date{2020, 1, 2}, Date{2020, 1, 3}};
  report.values = {1.01, 0.99};
  report.log_returns = {std::log(1.01), std::log(0.99 / 1.01)};
  report.weight_history = {Eigen::Vector3d(0.2, 0.5, 0.3), Eigen::Vector3d(1.0, 0.0, 0.0)};
  report.roi_pct = -1.0;
  report.mdd_pct = 100.0 * (1.01 - 0.99) / 1.01;
  report.var = 0.01;
  report.cvar = 0.012;

  write_report_csv((dir / "report.csv").string(), report);
  write_weights_csv((dir / "weights.csv").string(), report, {"aaa", "bbb"});
  write_metrics_txt((dir / "metrics.txt").string(), report);

  std::ifstream rep(dir / "report.csv");
  std::string line;
  std::getline(rep, line);
  CHECK(line == "date,value,roi_to_date_pct");
  std::getline(rep, line);
  CHECK(line.substr(0, 11) == "2020-01-02,");

  std::ifstream wts(dir / "weights.csv");
  std::getline(wts, line);
  CHECK(line == "date,cash,aaa,bbb");

  std::ifstream met(dir / "metrics.txt");
  std::getline(met, line);
  CHECK(line == "roi_pct=-1.00");
  std::getline(met, line);
  CHECK(line.substr(0, 8) == "mdd_pct=");
  std::getline(met, line);
  CHECK(line == "sharpe=nan");
}
