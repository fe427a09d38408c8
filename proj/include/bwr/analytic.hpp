#pragma once

// Exact per-cycle expectations by walking a strategy's decision tree.

#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bwr/model.hpp"
#include "bwr/strategy.hpp"

namespace bwr {

struct WeightedRecord {
  double probability = 0.0;
  CycleRecord record;
};

struct CycleDistribution {
  std::map<CycleWord, WeightedRecord> entries;

  double total_probability() const;
};

/// Every terminal word with its probability p^{#B} q^{#A} and resolved record.
/// Throws ParamError if the strategy runs past its cycle bound.
CycleDistribution enumerate(const StrategySpec& strategy, const NetworkParams& params);

/// Exact expectations. e_tau is E[word length] * tau0 at constant difficulty.
ProfitabilityReport expectations(const CycleDistribution& dist, const NetworkParams& params, Protocol protocol);

/// Shortcut for expectations(enumerate(...)).
ProfitabilityReport exact_report(const StrategySpec& strategy, const NetworkParams& params, Protocol protocol);

/// q^2 (4 - q) / (1 + q + q^3)
double closed_form_gamma_one_plus_two(double q);

/// Closed-form gamma for the built-in strategies, if one is known.
std::optional<double> closed_form_gamma(const std::string& strategy_name, double q, Protocol protocol);

struct ThresholdResult {
  enum class Kind { root, none, identically_zero };
  Kind kind = Kind::none;
  double value = 0.0;  // meaningful for Kind::root only
};

/// Smallest q in (0,1) where gamma(q) crosses q, located by a grid scan and
/// refined by bisection to an interval of width 1e-9.
ThresholdResult threshold(const StrategySpec& strategy, Protocol protocol, double x = 0.0);

struct DominancePoint {
  double q = 0.0;
  double x = 0.0;
  double e_reward = 0.0;
  double e_d = 0.0;
  double margin = 0.0;          // e_reward - q e_d
  bool equality_allowed = false;  // strategy never leaves an attacker orphan unpaid
  bool ok = false;
};

struct DominanceReport {
  std::vector<DominancePoint> points;
  bool all_ok = true;
};

/// Checks E[reward] <= q E[D] at every grid point, with equality permitted
/// only for strategies whose attacker orphans are all revealed and fully paid
/// (which for x < 1 means there are none).
DominanceReport verify_dominance(const StrategySpec& strategy, std::span<const double> q_grid, double x);

struct SearchResult {
  RuleTable rules;
  StrategySpec strategy;
  double gamma = 0.0;
  std::size_t candidates = 0;
};

/// Exhaustive search of legal table strategies whose terminals have length
/// <= max_length, maximizing gamma under the standard protocol with x = 0.
/// Ties keep the earliest candidate; leaves are enumerated before splits so
/// shorter strategies come first.
SearchResult best_strategy_up_to(int max_length, double q);
inline SearchResult best_three_block_strategy(double q) { return best_strategy_up_to(3, q); }

struct SweepRow {
  double q = 0.0;
  double gamma_exact = 0.0;
  std::optional<double> gamma_formula;
  double e_g = 0.0;
  double e_h = 0.0;
  double e_d = 0.0;
  double margin_modified = 0.0;
};

std::vector<SweepRow> analytic_sweep(const StrategySpec& strategy, std::span<const double> q_grid,
                                     Protocol protocol, double x);

inline constexpr std::string_view kSweepCsvHeader = "q,gamma_exact,gamma_formula,e_g,e_h,e_d,margin_modified";
void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows);

}  // namespace bwr
