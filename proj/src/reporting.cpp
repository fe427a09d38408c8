#include "bwr/reporting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <variant>

#include "json.hpp"

#include "bwr/analytic.hpp"
#include "bwr/simulator.hpp"

namespace bwr {

namespace {

std::string trim(std::string s) {
  const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  s.erase(s.begin(), std::find_if_not(s.begin(), s.end(), is_space));
  s.erase(std::find_if_not(s.rbegin(), s.rend(), is_space).base(), s.end());
  return s;
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument("");
    return d;
  } catch (const std::exception&) {
    throw ParamError(key + ": expected a number, got '" + v + "'");
  }
}

std::int64_t to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument("");
    return i;
  } catch (const std::exception&) {
    throw ParamError(key + ": expected an integer, got '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v.empty()) return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParamError(key + ": expected true/false, got '" + v + "'");
}

// One summary or data table, rendered as CSV (header + rows) or JSON lines.
using Cell = std::variant<std::monostate, std::string, double, std::int64_t, bool>;

class Table {
public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<Cell> row) { rows_.push_back(std::move(row)); }

  void write(std::ostream& os, OutputFormat format) const {
    if (format == OutputFormat::csv) {
      for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
      os << '\n';
      for (const auto& row : rows_) {
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (i) os << ',';
          std::visit(
              [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                if constexpr (std::is_same_v<T, double>)
                  os << format_real(v);
                else if constexpr (std::is_same_v<T, bool>)
                  os << (v ? "true" : "false");
                else if constexpr (!std::is_same_v<T, std::monostate>)
                  os << v;
              },
              row[i]);
        }
        os << '\n';
      }
      return;
    }
    for (const auto& row : rows_) {
      nlohmann::ordered_json j;
      for (std::size_t i = 0; i < row.size(); ++i) {
        std::visit(
            [&](const auto& v) {
              using T = std::decay_t<decltype(v)>;
              if constexpr (std::is_same_v<T, std::monostate>)
                j[columns_[i]] = nullptr;
              else
                j[columns_[i]] = v;
            },
            row[i]);
      }
      os << j.dump() << '\n';
    }
  }

private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

Cell optional_cell(const std::optional<double>& v) { return v ? Cell{*v} : Cell{}; }

}  // namespace

std::vector<double> parse_q_grid(const std::string& text) {
  std::vector<double> out;
  const auto colon = std::count(text.begin(), text.end(), ':');
  if (colon == 2) {
    std::stringstream ss(text);
    std::string lo_s, hi_s, step_s;
    std::getline(ss, lo_s, ':');
    std::getline(ss, hi_s, ':');
    std::getline(ss, step_s);
    const double lo = to_real("q-grid", trim(lo_s));
    const double hi = to_real("q-grid", trim(hi_s));
    const double step = to_real("q-grid", trim(step_s));
    if (!(step > 0.0) || hi < lo) throw ParamError("q-grid: need lo <= hi and step > 0");
    const auto n = static_cast<std::int64_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    for (std::int64_t i = 0; i < n; ++i) out.push_back(std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12);
  } else if (colon == 0) {
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_real("q-grid", trim(item)));
  } else {
    throw ParamError("q-grid: expected lo:hi:step or a comma separated list");
  }
  if (out.empty()) throw ParamError("q-grid is empty");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0 && out[i] < 1.0)) throw ParamError("q-grid: value outside (0,1)");
    if (i > 0 && !(out[i] > out[i - 1])) throw ParamError("q-grid: values must be strictly increasing");
  }
  return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParamError("config line " + std::to_string(line_no) + ": expected key=value");
    auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParamError("config line " + std::to_string(line_no) + ": empty key");
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "strategy") cfg.strategy = value;
  else if (key == "rules") cfg.rules_file = value;
  else if (key == "q") cfg.q = to_real(key, value);
  else if (key == "q-grid") cfg.q_grid = parse_q_grid(value);
  else if (key == "variant") cfg.variant = parse_protocol(value);
  else if (key == "x") cfg.x = to_real(key, value);
  else if (key == "cycles") cfg.n_cycles = to_int(key, value);
  else if (key == "epochs") cfg.n_epochs = static_cast<int>(to_int(key, value));
  else if (key == "warmup") cfg.warmup = static_cast<int>(to_int(key, value));
  else if (key == "replications") cfg.replications = static_cast<int>(to_int(key, value));
  else if (key == "seed") {
    const auto s = to_int(key, value);
    if (s < 0) throw ParamError("seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  }
  else if (key == "n0") cfg.n0 = to_int(key, value);
  else if (key == "tau0") cfg.tau0 = to_real(key, value);
  else if (key == "workers") {
    const auto w = to_int(key, value);
    if (w < 1) throw ParamError("workers must be at least 1");
    cfg.workers = static_cast<unsigned>(w);
  }
  else if (key == "out") cfg.output = value;
  else if (key == "summary") cfg.summary_output = value;
  else if (key == "format") {
    if (value == "csv") cfg.format = OutputFormat::csv;
    else if (value == "jsonl" || value == "json-lines") cfg.format = OutputFormat::jsonl;
    else throw ParamError("format: expected csv or jsonl");
  }
  else if (key == "longrun") cfg.longrun = to_bool(key, value);
  else if (key == "martingale") cfg.martingale = to_bool(key, value);
  else if (key == "bound") cfg.bound = to_bool(key, value);
  else throw ParamError("unknown setting '" + key + "'");
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParamError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  ExperimentConfig cfg;
  for (const auto& [k, v] : parse_config_text(ss.str())) apply_setting(cfg, k, v);
  return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
  for (double q : config_qs(cfg)) config_params(cfg, q);
  if (cfg.n_cycles < 1) throw ParamError("cycles must be at least 1");
  if (cfg.warmup < 1 || cfg.n_epochs <= cfg.warmup) throw ParamError("need epochs > warmup >= 1");
  if (cfg.replications < 1) throw ParamError("replications must be at least 1");
  if (static_cast<int>(cfg.longrun) + static_cast<int>(cfg.martingale) + static_cast<int>(cfg.bound) > 1)
    throw ParamError("choose at most one of --longrun, --martingale, --bound");
  config_strategy(cfg);
}

std::vector<double> config_qs(const ExperimentConfig& cfg) {
  if (!cfg.q_grid.empty()) return cfg.q_grid;
  if (cfg.q) return {*cfg.q};
  throw ParamError("no q given (use --q or --q-grid)");
}

NetworkParams config_params(const ExperimentConfig& cfg, double q) {
  NetworkParams p;
  p.q = q;
  p.tau0 = cfg.tau0;
  p.n0 = cfg.n0;
  p.orphan_reward_x = cfg.x;
  return validate_params(p);
}

StrategySpec config_strategy(const ExperimentConfig& cfg) {
  if (!cfg.rules_file.empty()) return load_word_rule_file(cfg.rules_file);
  return builtin_strategy(cfg.strategy);
}

// ---------------------------------------------------------------------------

int cmd_analytic(const ExperimentConfig& cfg, std::ostream& out) {
  validate_config(cfg);
  const auto strategy = config_strategy(cfg);
  const auto qs = config_qs(cfg);
  const auto rows = analytic_sweep(strategy, qs, cfg.variant, cfg.x);
  const auto dominance = verify_dominance(strategy, qs, cfg.x);

  Table t({"q", "gamma_exact", "gamma_formula", "e_g", "e_h", "e_d", "margin_modified"});
  for (const auto& r : rows)
    t.add({r.q, r.gamma_exact, optional_cell(r.gamma_formula), r.e_g, r.e_h, r.e_d, r.margin_modified});
  t.write(out, cfg.format);
  return dominance.all_ok ? kExitOk : kExitViolation;
}

int cmd_threshold(const ExperimentConfig& cfg, std::ostream& out) {
  if (cfg.x < 0.0 || cfg.x > 1.0) throw ParamError("orphan reward x out of range [0,1]");
  const auto strategy = config_strategy(cfg);
  const auto r = threshold(strategy, cfg.variant, cfg.x);
  Table t({"strategy", "variant", "x", "result", "threshold"});
  std::string kind;
  Cell value;
  switch (r.kind) {
    case ThresholdResult::Kind::root: kind = "root"; value = r.value; break;
    case ThresholdResult::Kind::none: kind = "none"; break;
    case ThresholdResult::Kind::identically_zero: kind = "identically_zero"; break;
  }
  t.add({strategy.name, std::string(to_string(cfg.variant)), cfg.x, kind, value});
  t.write(out, cfg.format);
  return kExitOk;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream* data, std::ostream& summary) {
  validate_config(cfg);
  const auto strategy = config_strategy(cfg);
  const auto qs = config_qs(cfg);
  int code = kExitOk;

  if (cfg.longrun) {
    Table t({"q", "variant", "revenue_per_tau0", "revenue_per_tau0_stderr", "gamma_per_block",
             "gamma_per_block_stderr", "gamma_exact", "equilibrium_delta", "equilibrium_delta_stderr",
             "mean_interblock", "mean_interblock_stderr", "mean_time_per_d_unit", "mean_time_per_d_unit_stderr",
             "epochs_simulated", "warmup_epochs", "replications", "n0"});
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const auto params = config_params(cfg, qs[i]);
      const LongRunOptions lr{cfg.variant, cfg.n_epochs, cfg.warmup, cfg.replications};
      const SimOptions o{qs.size() == 1 ? cfg.seed : CounterStream::derive_key(cfg.seed, i), cfg.workers};
      const auto run = simulate_longrun(strategy, params, lr, o);
      if (data) write_epoch_csv(*data, run.epoch_log);
      const auto& r = run.result;
      const auto exact = exact_report(strategy, params, cfg.variant);
      t.add({qs[i], std::string(to_string(cfg.variant)), r.revenue_per_tau0, r.revenue_per_tau0_stderr,
             r.gamma_per_block, r.gamma_per_block_stderr, exact.gamma, r.equilibrium_delta,
             r.equilibrium_delta_stderr, r.mean_interblock, r.mean_interblock_stderr, r.mean_time_per_d_unit,
             r.mean_time_per_d_unit_stderr, std::int64_t{r.epochs_simulated}, std::int64_t{r.warmup_epochs},
             std::int64_t{r.replications}, cfg.n0});
    }
    t.write(summary, cfg.format);
    return code;
  }

  if (cfg.martingale) {
    Table t({"q", "cycles", "e_n_attacker", "alpha_attacker_e_tau", "diff_attacker", "stderr_attacker",
             "e_n_honest", "alpha_honest_e_tau", "diff_honest", "stderr_honest", "counting_identity", "pass"});
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const auto params = config_params(cfg, qs[i]);
      const SimOptions o{qs.size() == 1 ? cfg.seed : CounterStream::derive_key(cfg.seed, i), cfg.workers};
      const auto r = martingale_check(strategy, params, cfg.n_cycles, o);
      if (!r.pass) code = kExitViolation;
      t.add({qs[i], cfg.n_cycles, r.e_n_attacker, r.alpha_attacker * r.e_tau, r.diff_attacker, r.stderr_attacker,
             r.e_n_honest, r.alpha_honest * r.e_tau, r.diff_honest, r.stderr_honest, r.counting_identity, r.pass});
    }
    t.write(summary, cfg.format);
    return code;
  }

  if (cfg.bound) {
    Table t({"q", "cycles", "gain_rate", "stderr", "bound", "pass"});
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const auto params = config_params(cfg, qs[i]);
      const SimOptions o{qs.size() == 1 ? cfg.seed : CounterStream::derive_key(cfg.seed, i), cfg.workers};
      const auto r = no_daa_bound_check(strategy, params, cfg.n_cycles, o);
      if (!r.pass) code = kExitViolation;
      t.add({qs[i], cfg.n_cycles, r.ratio, r.stderr, r.bound, r.pass});
    }
    t.write(summary, cfg.format);
    return code;
  }

  Table t({"q", "variant", "mode", "cycles", "gamma", "stderr", "gamma_exact", "e_g", "e_h", "e_d", "e_tau",
           "e_reward", "records_consistent"});
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto params = config_params(cfg, qs[i]);
    const SimOptions o{qs.size() == 1 ? cfg.seed : CounterStream::derive_key(cfg.seed, i), cfg.workers};
    CycleSink sink;
    if (data) {
      write_cycle_csv_header(*data);
      sink = [data](const CycleRecord& rec) { write_cycle_csv_row(*data, rec); };
    }
    const auto s = simulate_cycles(strategy, params, cfg.n_cycles, o, cfg.variant, sink);
    if (!s.all_records_consistent) code = kExitViolation;
    const auto& r = s.report;
    const auto exact = exact_report(strategy, params, cfg.variant);
    t.add({qs[i], std::string(to_string(cfg.variant)), std::string("montecarlo"), s.n_cycles, r.gamma,
           optional_cell(r.stderr_gamma), exact.gamma, r.e_g, r.e_h, r.e_d, r.e_tau, r.e_reward,
           s.all_records_consistent});
  }
  t.write(summary, cfg.format);
  return code;
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
  validate_config(cfg);
  const auto strategy = config_strategy(cfg);
  const auto qs = config_qs(cfg);
  Table t({"q", "gamma_exact", "gamma_mc", "stderr", "z_score"});
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const auto params = config_params(cfg, qs[i]);
    const SimOptions o{CounterStream::derive_key(cfg.seed, i), cfg.workers};
    const auto s = simulate_cycles(strategy, params, cfg.n_cycles, o, cfg.variant);
    const double exact = exact_report(strategy, params, cfg.variant).gamma;
    const double se = s.report.stderr_gamma.value_or(0.0);
    const Cell z = se > 0.0 ? Cell{(s.report.gamma - exact) / se} : Cell{};
    t.add({qs[i], exact, s.report.gamma, se, z});
  }
  t.write(out, cfg.format);
  return kExitOk;
}

}  // namespace bwr
