#include <CLI11.hpp>
#include <iostream>
#include <optional>

#include "gfolio/commands.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required = true) {
  auto* opt = cmd->add_option("--config", flags.config_path, "run configuration file");
  if (config_required) opt->required();
  cmd->add_option("--seed", flags.seed, "override run.seed");
  cmd->add_option("--out", flags.out_dir, "override run.out_dir");
}

gfolio::RunConfig resolve(const CommonFlags& flags) {
  gfolio::RunConfig cfg =
      flags.config_path.empty() ? gfolio::RunConfig{} : gfolio::parse_config(flags.config_path);
  if (flags.seed) cfg.seed = *flags.seed;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"portfolio engine: graph-convolutional actor-critic trading at desk scale"};
  app.require_subcommand(1);

  CommonFlags ingest_flags, synth_flags, train_flags, backtest_flags;
  std::string report_dir;
  double report_alpha = 0.95;

  CLI::App* ingest = app.add_subcommand("ingest", "load and validate the asset panel");
  add_common(ingest, ingest_flags);

  CLI::App* synth = app.add_subcommand("synth", "generate a synthetic OHLCV market");
  add_common(synth, synth_flags);

  CLI::App* train = app.add_subcommand("train", "offline training; writes checkpoint and log");
  add_common(train, train_flags);

  CLI::App* backtest =
      app.add_subcommand("backtest", "online backtest of a checkpoint over the test range");
  add_common(backtest, backtest_flags);

  CLI::App* report = app.add_subcommand("report", "recompute metrics from an output directory");
  report->add_option("--out", report_dir, "directory holding report.csv")->required();
  report->add_option("--cvar-alpha", report_alpha, "tail level for VaR/CVaR");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : gfolio::kExitUsage;
  }

  if (ingest->parsed()) {
    return gfolio::run_command("ingest", [&] {
      gfolio::cmd_ingest(resolve(ingest_flags), std::cout);
    }, std::cerr);
  }
  if (synth->parsed()) {
    return gfolio::run_command("synth", [&] {
      gfolio::cmd_synth(resolve(synth_flags), std::cout);
    }, std::cerr);
  }
  if (train->parsed()) {
    return gfolio::run_command("train", [&] {
      gfolio::cmd_train(resolve(train_flags), std::cout);
    }, std::cerr);
  }
  if (backtest->parsed()) {
    return gfolio::run_command("backtest", [&] {
      const gfolio::RunConfig cfg = resolve(backtest_flags);
      gfolio::cmd_backtest(cfg, cfg.checkpoint, std::cout);
    }, std::cerr);
  }
  if (report->parsed()) {
    return gfolio::run_command("report", [&] {
      gfolio::cmd_report(report_dir, report_alpha, std::cout);
    }, std::cerr);
  }
  return gfolio::kExitUsage;
}
