#pragma once

// Experiment configuration and the command runners behind the CLI.

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bwr/model.hpp"
#include "bwr/random.hpp"
#include "bwr/strategy.hpp"

namespace bwr {

enum class OutputFormat { csv, jsonl };

struct ExperimentConfig {
  std::string strategy = "one-plus-two";
  std::string rules_file;  // overrides `strategy` when set
  std::optional<double> q;
  std::vector<double> q_grid;
  Protocol variant = Protocol::standard;
  double x = 0.0;
  std::int64_t n_cycles = 1'000'000;
  int n_epochs = 50;
  int warmup = 10;
  int replications = 200;
  std::uint64_t seed = kDefaultSeed;
  std::int64_t n0 = 2016;
  double tau0 = 10.0;
  unsigned workers = 1;
  std::string output;          // empty: stdout for tables, nowhere for per-cycle data
  std::string summary_output;  // empty: stdout
  OutputFormat format = OutputFormat::csv;
  bool longrun = false;
  bool martingale = false;
  bool bound = false;
};

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitViolation = 3 };

/// "lo:hi:step" or a comma separated list. Values must be strictly
/// increasing inside (0,1).
std::vector<double> parse_q_grid(const std::string& text);

/// Flat key=value text; '#' starts a comment line. Throws on malformed lines.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Sets one field from its textual form. Keys match the long CLI flag names
/// (q, q-grid, strategy, rules, variant, x, cycles, epochs, warmup,
/// replications, seed, n0, tau0, workers, out, summary, format, longrun,
/// martingale, bound).
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

ExperimentConfig load_config_file(const std::string& path);

/// Throws ParamError when the configuration cannot run.
void validate_config(const ExperimentConfig& cfg);

/// The q values the config asks for: the grid if given, else the single q.
std::vector<double> config_qs(const ExperimentConfig& cfg);
NetworkParams config_params(const ExperimentConfig& cfg, double q);
StrategySpec config_strategy(const ExperimentConfig& cfg);

// Command runners. Each writes its data and summary to the given streams and
// returns an ExitCode. ParamError escapes to the caller.
int cmd_analytic(const ExperimentConfig& cfg, std::ostream& out);
int cmd_threshold(const ExperimentConfig& cfg, std::ostream& out);
int cmd_simulate(const ExperimentConfig& cfg, std::ostream* data, std::ostream& summary);
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out);

}  // namespace bwr
