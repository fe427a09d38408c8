// Command-line front end.
//
//   bwr_cli analytic  --strategy one-plus-two --q-grid 0.05:0.45:0.05
//   bwr_cli threshold --strategy one-plus-two --variant orphan
//   bwr_cli simulate  --strategy one-plus-two --q 0.5 --cycles 1000000 --seed 42
//   bwr_cli sweep     --strategy one-plus-two --q-grid 0.1:0.4:0.1 --cycles 100000
//
// Settings may also come from a key=value file (--config); flags override it.

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bwr/reporting.hpp"

namespace {

struct CommandOptions {
  std::string config_file;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::vector<std::pair<std::string, CLI::Option*>> given;
};

void add_common(CLI::App* cmd, CommandOptions& o, bool simulate_flags) {
  cmd->add_option("--config", o.config_file, "key=value settings file");
  const std::vector<std::pair<std::string, std::string>> options = {
      {"strategy", "built-in strategy: honest | one-plus-two"},
      {"rules", "word-rule strategy CSV file"},
      {"q", "attacker relative hashrate"},
      {"q-grid", "lo:hi:step or comma list of q values"},
      {"variant", "protocol: none | standard | orphan"},
      {"x", "orphan reward fraction in [0,1]"},
      {"cycles", "number of cycles"},
      {"epochs", "long-run epochs"},
      {"warmup", "long-run warmup epochs"},
      {"replications", "long-run replications"},
      {"seed", "master seed"},
      {"n0", "retarget window in official blocks"},
      {"tau0", "target interblock time in minutes"},
      {"workers", "worker threads"},
      {"out", "data output path"},
      {"summary", "summary output path"},
      {"format", "csv | jsonl"},
  };
  for (const auto& [name, help] : options) {
    auto* opt = cmd->add_option("--" + name, o.values[name], help);
    o.given.emplace_back(name, opt);
  }
  if (simulate_flags) {
    const std::pair<std::string, std::string> flags[] = {
        {"longrun", "epoch-by-epoch run with difficulty retargeting"},
        {"martingale", "check E[N'] = a' E[tau] on simulated cycles"},
        {"bound", "check E[G] / E[tau] <= q / tau0 without retargeting"},
    };
    for (const auto& [name, help] : flags) {
      auto* opt = cmd->add_flag("--" + name, o.flags[name], help);
      o.given.emplace_back(name, opt);
    }
  }
}

bwr::ExperimentConfig build_config(const CommandOptions& o) {
  bwr::ExperimentConfig cfg = o.config_file.empty() ? bwr::ExperimentConfig{} : bwr::load_config_file(o.config_file);
  for (const auto& [name, opt] : o.given) {
    if (opt->count() == 0) continue;
    auto flag = o.flags.find(name);
    bwr::apply_setting(cfg, name, flag != o.flags.end() ? "true" : o.values.at(name));
  }
  return cfg;
}

std::ostream& open_or(const std::string& path, std::unique_ptr<std::ofstream>& holder, std::ostream& fallback) {
  if (path.empty()) return fallback;
  holder = std::make_unique<std::ofstream>(path, std::ios::binary);
  if (!*holder) throw bwr::ParamError("cannot open output file '" + path + "'");
  return *holder;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Block withholding profitability toolkit"};
  app.require_subcommand(1);

  CommandOptions analytic_opts, threshold_opts, simulate_opts, sweep_opts;
  auto* analytic = app.add_subcommand("analytic", "exact expectations over a q grid");
  auto* thresh = app.add_subcommand("threshold", "smallest q where the strategy beats honest mining");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo runs and diagnostics");
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo versus exact gamma over a q grid");
  add_common(analytic, analytic_opts, false);
  add_common(thresh, threshold_opts, false);
  add_common(simulate, simulate_opts, true);
  add_common(sweep, sweep_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return bwr::kExitConfig;
  }

  try {
    std::unique_ptr<std::ofstream> out_file, summary_file;
    if (analytic->parsed()) {
      const auto cfg = build_config(analytic_opts);
      return bwr::cmd_analytic(cfg, open_or(cfg.output, out_file, std::cout));
    }
    if (thresh->parsed()) {
      const auto cfg = build_config(threshold_opts);
      return bwr::cmd_threshold(cfg, open_or(cfg.output, out_file, std::cout));
    }
    if (simulate->parsed()) {
      const auto cfg = build_config(simulate_opts);
      std::ostream* data = cfg.output.empty() ? nullptr : &open_or(cfg.output, out_file, std::cout);
      return bwr::cmd_simulate(cfg, data, open_or(cfg.summary_output, summary_file, std::cout));
    }
    const auto cfg = build_config(sweep_opts);
    return bwr::cmd_sweep(cfg, open_or(cfg.output, out_file, std::cout));
  } catch (const bwr::ParamError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return bwr::kExitConfig;
  }
}
