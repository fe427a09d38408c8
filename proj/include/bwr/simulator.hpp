#pragma once

// Timed Monte Carlo of repeated strategy cycles.
//
// Work is split into fixed units (blocks of cycles, or whole long-run
// replications). Unit i draws from CounterStream(derive_key(seed, i)) and
// results are reduced in unit order, so output does not depend on the number
// of worker threads.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "bwr/difficulty.hpp"
#include "bwr/model.hpp"
#include "bwr/strategy.hpp"

namespace bwr {

struct SimOptions {
  std::uint64_t seed = kDefaultSeed;
  unsigned workers = 1;
};

/// Cycles per work unit in simulate_cycles.
inline constexpr std::int64_t kCyclesPerUnit = 1 << 15;

/// Running sums of a feature vector and its outer products.
class Moments {
public:
  explicit Moments(std::size_t dim = 0) : dim_(dim), sum_(dim, 0.0), cross_(dim * dim, 0.0) {}

  void add(std::span<const double> f);
  void merge(const Moments& other);

  std::int64_t count() const { return n_; }
  double sum(std::size_t i) const { return sum_[i]; }
  double mean(std::size_t i) const { return sum_[i] / static_cast<double>(n_); }
  double cov(std::size_t i, std::size_t j) const;
  /// Standard error of mean(i).
  double stderr_mean(std::size_t i) const;
  /// Standard error of mean(num) / mean(den) by the delta method.
  double stderr_ratio(std::size_t num, std::size_t den) const;
  /// Standard error of mean(a) - c * mean(b).
  double stderr_diff(std::size_t a, std::size_t b, double c) const;

private:
  std::size_t dim_;
  std::int64_t n_ = 0;
  std::vector<double> sum_;
  std::vector<double> cross_;
};

// Per-cycle feature layout used by CycleSummary::moments.
enum CycleFeature : std::size_t { kG, kH, kD, kTau, kReward, kNa, kNb, kLen, kCycleFeatureCount };

struct CycleSummary {
  ProfitabilityReport report;
  std::int64_t n_cycles = 0;
  std::map<CycleWord, std::int64_t> word_counts;
  Moments moments{kCycleFeatureCount};
  bool all_records_consistent = true;  // check_accounting and N + N' = length on every cycle
};

using CycleSink = std::function<void(const CycleRecord&)>;

/// n_cycles independent timed cycles at the reference difficulty. Records are
/// passed to `sink` in cycle order when given.
CycleSummary simulate_cycles(const StrategySpec& strategy, const NetworkParams& params, std::int64_t n_cycles,
                             const SimOptions& opts, Protocol protocol = Protocol::standard,
                             const CycleSink& sink = {});

struct MartingaleReport {
  double alpha_attacker = 0.0;  // alpha' = q / tau0
  double alpha_honest = 0.0;    // alpha  = p / tau0
  double e_tau = 0.0;
  double e_n_attacker = 0.0;
  double e_n_honest = 0.0;
  double diff_attacker = 0.0;  // E[N'(tau)] - alpha' E[tau]
  double stderr_attacker = 0.0;
  double diff_honest = 0.0;  // E[N(tau)] - alpha E[tau]
  double stderr_honest = 0.0;
  bool counting_identity = true;
  bool pass = false;
};

/// Compensated counting processes stopped at the cycle end: both
/// discrepancies must lie within 3 standard errors of zero.
MartingaleReport martingale_check(const StrategySpec& strategy, const NetworkParams& params, std::int64_t n_cycles,
                                  const SimOptions& opts);

struct BoundReport {
  double ratio = 0.0;  // E[G] / E[tau], blocks per minute
  double stderr = 0.0;
  double bound = 0.0;  // q / tau0
  bool pass = false;
};

/// Constant difficulty: E[G]/E[tau] <= q/tau0 + 3 stderr.
BoundReport no_daa_bound_check(const StrategySpec& strategy, const NetworkParams& params, std::int64_t n_cycles,
                               const SimOptions& opts);

struct LongRunOptions {
  Protocol variant = Protocol::standard;
  int n_epochs = 50;
  int warmup = 10;
  int replications = 1;
};

struct LongRunResult {
  Protocol variant = Protocol::standard;
  double revenue_per_tau0 = 0.0;
  double revenue_per_tau0_stderr = 0.0;
  double gamma_per_block = 0.0;  // reward per unit of the variant's progress measure
  double gamma_per_block_stderr = 0.0;
  double equilibrium_delta = 0.0;
  double equilibrium_delta_stderr = 0.0;
  double mean_interblock = 0.0;  // minutes per official block
  double mean_interblock_stderr = 0.0;
  double mean_time_per_d_unit = 0.0;  // minutes per official-or-reported-orphan block
  double mean_time_per_d_unit_stderr = 0.0;
  int epochs_simulated = 0;
  int warmup_epochs = 0;
  int replications = 0;
  double total_minutes = 0.0;
};

struct LongRunOutput {
  LongRunResult result;
  std::vector<EpochLogRow> epoch_log;  // replication 0
};

/// Back-to-back cycles with retargeting per `variant`. An epoch closes at the
/// first cycle end with at least n0 official blocks. Estimates pool every
/// post-warmup epoch of every replication.
LongRunOutput simulate_longrun(const StrategySpec& strategy, const NetworkParams& params,
                               const LongRunOptions& lr, const SimOptions& opts);

/// Runs job(i) for i in [0, n) on up to `workers` threads.
void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job);

}  // namespace bwr
