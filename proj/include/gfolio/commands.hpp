#pragma once

#include <iosfwd>
#include <string>

#include "gfolio/config.hpp"

namespace gfolio {

// Exit codes shared by the command layer and the CLI:
// 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// Each command is a pure function of (config, input files, seed); reruns
// with identical inputs produce byte-identical outputs. All of them echo the
// resolved configuration into <out_dir>/effective_config.txt.
int cmd_ingest(const RunConfig& config, std::ostream& out);
int cmd_synth(const RunConfig& config, std::ostream& out);
int cmd_train(const RunConfig& config, std::ostream& out);
int cmd_backtest(const RunConfig& config, const std::string& checkpoint_path, std::ostream& out);
// Recomputes the headline metrics from an existing report.csv.
int cmd_report(const std::string& report_dir, double cvar_alpha, std::ostream& out);

// Maps an exception (or success) to the exit taxonomy.
int run_command(const std::string& name, const std::function<void()>& body, std::ostream& err);

}  // namespace gfolio
