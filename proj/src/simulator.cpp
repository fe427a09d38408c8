#include "bwr/simulator.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace bwr {

// ---------------------------------------------------------------------------
// Moments

void Moments::add(std::span<const double> f) {
  ++n_;
  for (std::size_t i = 0; i < dim_; ++i) {
    sum_[i] += f[i];
    for (std::size_t j = 0; j < dim_; ++j) cross_[i * dim_ + j] += f[i] * f[j];
  }
}

void Moments::merge(const Moments& other) {
  n_ += other.n_;
  for (std::size_t i = 0; i < dim_; ++i) sum_[i] += other.sum_[i];
  for (std::size_t k = 0; k < cross_.size(); ++k) cross_[k] += other.cross_[k];
}

double Moments::cov(std::size_t i, std::size_t j) const {
  if (n_ < 2) return 0.0;
  const double n = static_cast<double>(n_);
  return (cross_[i * dim_ + j] - sum_[i] * sum_[j] / n) / (n - 1.0);
}

double Moments::stderr_mean(std::size_t i) const {
  return std::sqrt(std::max(0.0, cov(i, i)) / static_cast<double>(n_));
}

double Moments::stderr_ratio(std::size_t num, std::size_t den) const {
  const double r = mean(num) / mean(den);
  const double v = cov(num, num) - 2.0 * r * cov(num, den) + r * r * cov(den, den);
  return std::sqrt(std::max(0.0, v) / static_cast<double>(n_)) / std::abs(mean(den));
}

double Moments::stderr_diff(std::size_t a, std::size_t b, double c) const {
  const double v = cov(a, a) - 2.0 * c * cov(a, b) + c * c * cov(b, b);
  return std::sqrt(std::max(0.0, v) / static_cast<double>(n_));
}

// ---------------------------------------------------------------------------

void parallel_for(std::size_t n, unsigned workers, const std::function<void(std::size_t)>& job) {
  const auto threads = std::min<std::size_t>(std::max(1u, workers), n);
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Constant-difficulty cycles

namespace {

struct CycleUnit {
  Moments moments{kCycleFeatureCount};
  std::map<CycleWord, std::int64_t> word_counts;
  std::vector<CycleRecord> records;
  bool consistent = true;
};

CycleUnit run_unit(const StrategySpec& strategy, const NetworkParams& params, std::uint64_t key, std::int64_t count,
                   double rate, bool keep_records) {
  CycleUnit unit;
  CounterStream rng(key);
  if (keep_records) unit.records.reserve(static_cast<std::size_t>(count));
  std::array<double, kCycleFeatureCount> f{};
  for (std::int64_t i = 0; i < count; ++i) {
    CycleRecord rec = run_cycle(strategy, params, rng, rate);
    const int n_a = rec.word.count_attacker();
    const int n_b = rec.word.count_honest();
    unit.consistent = unit.consistent && check_accounting(rec, params.orphan_reward_x) &&
                      n_a + n_b == static_cast<int>(rec.word.size());
    f[kG] = static_cast<double>(rec.g);
    f[kH] = static_cast<double>(rec.h);
    f[kD] = static_cast<double>(rec.d);
    f[kTau] = *rec.duration;
    f[kReward] = rec.reward;
    f[kNa] = n_a;
    f[kNb] = n_b;
    f[kLen] = static_cast<double>(rec.word.size());
    unit.moments.add(f);
    ++unit.word_counts[rec.word];
    if (keep_records) unit.records.push_back(std::move(rec));
  }
  return unit;
}

}  // namespace

CycleSummary simulate_cycles(const StrategySpec& strategy, const NetworkParams& params, std::int64_t n_cycles,
                             const SimOptions& opts, Protocol protocol, const CycleSink& sink) {
  if (n_cycles < 1) throw ParamError("n_cycles must be at least 1");
  const double rate = network_rate(params, 1.0).total;
  const auto n_units = static_cast<std::size_t>((n_cycles + kCyclesPerUnit - 1) / kCyclesPerUnit);
  const std::size_t wave = std::max<std::size_t>(1, std::max(1u, opts.workers) * 2u);

  CycleSummary summary;
  summary.n_cycles = n_cycles;
  for (std::size_t first = 0; first < n_units; first += wave) {
    const std::size_t count = std::min(wave, n_units - first);
    std::vector<CycleUnit> units(count);
    parallel_for(count, opts.workers, [&](std::size_t k) {
      const std::size_t u = first + k;
      const auto begin = static_cast<std::int64_t>(u) * kCyclesPerUnit;
      const auto len = std::min(kCyclesPerUnit, n_cycles - begin);
      units[k] = run_unit(strategy, params, CounterStream::derive_key(opts.seed, u), len, rate,
                          static_cast<bool>(sink));
    });
    for (auto& unit : units) {
      summary.moments.merge(unit.moments);
      for (const auto& [w, c] : unit.word_counts) summary.word_counts[w] += c;
      summary.all_records_consistent = summary.all_records_consistent && unit.consistent;
      if (sink)
        for (const auto& rec : unit.records) sink(rec);
    }
  }

  const auto& m = summary.moments;
  auto& r = summary.report;
  r.protocol = protocol;
  r.mode = EstimateMode::montecarlo;
  r.e_g = m.mean(kG);
  r.e_h = m.mean(kH);
  r.e_d = m.mean(kD);
  r.e_tau = m.mean(kTau);
  r.e_reward = m.mean(kReward);
  switch (protocol) {
    case Protocol::standard:
      r.gamma = r.e_reward / r.e_h;
      r.stderr_gamma = m.stderr_ratio(kReward, kH);
      break;
    case Protocol::orphan:
      r.gamma = r.e_reward / r.e_d;
      r.stderr_gamma = m.stderr_ratio(kReward, kD);
      break;
    case Protocol::none:
      r.gamma = r.e_reward / r.e_tau * params.tau0;
      r.stderr_gamma = m.stderr_ratio(kReward, kTau) * params.tau0;
      break;
  }
  return summary;
}

MartingaleReport martingale_check(const StrategySpec& strategy, const NetworkParams& params, std::int64_t n_cycles,
                                  const SimOptions& opts) {
  const auto s = simulate_cycles(strategy, params, n_cycles, opts);
  const auto& m = s.moments;
  const auto rates = network_rate(params, 1.0);
  MartingaleReport r;
  r.alpha_attacker = rates.attacker;
  r.alpha_honest = rates.honest;
  r.e_tau = m.mean(kTau);
  r.e_n_attacker = m.mean(kNa);
  r.e_n_honest = m.mean(kNb);
  r.diff_attacker = r.e_n_attacker - r.alpha_attacker * r.e_tau;
  r.diff_honest = r.e_n_honest - r.alpha_honest * r.e_tau;
  r.stderr_attacker = m.stderr_diff(kNa, kTau, r.alpha_attacker);
  r.stderr_honest = m.stderr_diff(kNb, kTau, r.alpha_honest);
  r.counting_identity = s.all_records_consistent;
  r.pass = r.counting_identity && std::abs(r.diff_attacker) <= 3.0 * r.stderr_attacker &&
           std::abs(r.diff_honest) <= 3.0 * r.stderr_honest;
  return r;
}

BoundReport no_daa_bound_check(const StrategySpec& strategy, const NetworkParams& params, std::int64_t n_cycles,
                               const SimOptions& opts) {
  const auto s = simulate_cycles(strategy, params, n_cycles, opts, Protocol::none);
  const auto& m = s.moments;
  BoundReport r;
  r.ratio = m.mean(kG) / m.mean(kTau);
  r.stderr = m.stderr_ratio(kG, kTau);
  r.bound = params.q / params.tau0;
  r.pass = r.ratio <= r.bound + 3.0 * r.stderr;
  return r;
}

// ---------------------------------------------------------------------------
// Long run with retargeting

namespace {

enum EpochFeature : std::size_t { kEpReward, kEpElapsed, kEpOfficial, kEpDUnits, kEpProgress, kEpDelta, kEpCount };

struct ReplicationResult {
  Moments moments{kEpCount};
  std::vector<EpochLogRow> log;
  double total_minutes = 0.0;
};

ReplicationResult run_replication(const StrategySpec& strategy, const NetworkParams& params, const LongRunOptions& lr,
                                  std::uint64_t key, bool keep_log) {
  ReplicationResult out;
  CounterStream rng(key);
  DifficultyState state;
  double epoch_reward = 0.0;
  int epoch = 0;
  while (epoch < lr.n_epochs) {
    const double rate = network_rate(params, state.delta).total;
    const CycleRecord rec = run_cycle(strategy, params, rng, rate);
    state.official_in_epoch += rec.h;
    state.orphans_in_epoch += rec.orph_h + rec.orph_pub_a;
    state.epoch_elapsed += *rec.duration;
    out.total_minutes += *rec.duration;
    epoch_reward += rec.reward;
    if (state.official_in_epoch < params.n0) continue;

    const auto d_units = state.official_in_epoch + state.orphans_in_epoch;
    const auto progress = lr.variant == Protocol::orphan ? d_units : state.official_in_epoch;
    if (keep_log)
      out.log.push_back({epoch, state.delta, state.official_in_epoch, state.orphans_in_epoch, state.epoch_elapsed});
    if (epoch >= lr.warmup) {
      const std::array<double, kEpCount> f{epoch_reward,
                                           state.epoch_elapsed,
                                           static_cast<double>(state.official_in_epoch),
                                           static_cast<double>(d_units),
                                           static_cast<double>(progress),
                                           state.delta};
      out.moments.add(f);
    }
    if (lr.variant != Protocol::none) state.delta = retarget_general(state, static_cast<double>(progress), params.tau0);
    state.reset_epoch();
    epoch_reward = 0.0;
    ++epoch;
  }
  return out;
}

}  // namespace

LongRunOutput simulate_longrun(const StrategySpec& strategy, const NetworkParams& params, const LongRunOptions& lr,
                               const SimOptions& opts) {
  if (lr.warmup < 1 || lr.n_epochs <= lr.warmup) throw ParamError("need n_epochs > warmup >= 1");
  if (lr.replications < 1) throw ParamError("need at least one replication");

  std::vector<ReplicationResult> reps(static_cast<std::size_t>(lr.replications));
  parallel_for(reps.size(), opts.workers, [&](std::size_t i) {
    reps[i] = run_replication(strategy, params, lr, CounterStream::derive_key(opts.seed, i), i == 0);
  });

  Moments m(kEpCount);
  LongRunOutput out;
  for (const auto& r : reps) {
    m.merge(r.moments);
    out.result.total_minutes += r.total_minutes;
  }
  out.epoch_log = std::move(reps[0].log);

  auto& res = out.result;
  res.variant = lr.variant;
  res.epochs_simulated = lr.n_epochs;
  res.warmup_epochs = lr.warmup;
  res.replications = lr.replications;
  res.revenue_per_tau0 = m.mean(kEpReward) / m.mean(kEpElapsed) * params.tau0;
  res.revenue_per_tau0_stderr = m.stderr_ratio(kEpReward, kEpElapsed) * params.tau0;
  res.gamma_per_block = m.mean(kEpReward) / m.mean(kEpProgress);
  res.gamma_per_block_stderr = m.stderr_ratio(kEpReward, kEpProgress);
  res.equilibrium_delta = m.mean(kEpDelta);
  res.equilibrium_delta_stderr = m.stderr_mean(kEpDelta);
  res.mean_interblock = m.mean(kEpElapsed) / m.mean(kEpOfficial);
  res.mean_interblock_stderr = m.stderr_ratio(kEpElapsed, kEpOfficial);
  res.mean_time_per_d_unit = m.mean(kEpElapsed) / m.mean(kEpDUnits);
  res.mean_time_per_d_unit_stderr = m.stderr_ratio(kEpElapsed, kEpDUnits);
  return out;
}

}  // namespace bwr
