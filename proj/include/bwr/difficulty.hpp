#pragma once

// Difficulty adjustment rules. Retargets are unclamped.

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bwr/model.hpp"

namespace bwr {

struct DifficultyState {
  double delta = 1.0;
  std::int64_t official_in_epoch = 0;
  std::int64_t orphans_in_epoch = 0;
  double epoch_elapsed = 0.0;  // minutes

  void reset_epoch() {
    official_in_epoch = 0;
    orphans_in_epoch = 0;
    epoch_elapsed = 0.0;
  }
};

/// delta * (n0 * tau0) / T. Requires a complete epoch (official_in_epoch == n0).
double retarget_standard(const DifficultyState& state, std::int64_t n0, double tau0);

/// delta * (D * tau0) / T for any progress D of the difficulty function.
double retarget_general(const DifficultyState& state, double d_progress, double tau0);

/// delta * ((n0 + n1) * tau0) / T with n1 the orphans reported this epoch.
double retarget_orphan(const DifficultyState& state, std::int64_t n0, double tau0);

struct BlockRates {
  double total = 0.0;     // lambda
  double honest = 0.0;    // alpha  = p lambda
  double attacker = 0.0;  // alpha' = q lambda
};

/// Total hash power is fixed, so the block rate scales as delta_ref / delta.
BlockRates network_rate(const NetworkParams& params, double delta, double delta_ref = 1.0);

struct EpochLogRow {
  std::int64_t epoch = 0;
  double delta = 0.0;  // difficulty in force during the epoch
  std::int64_t official = 0;
  std::int64_t orphans = 0;
  double elapsed_minutes = 0.0;
};

inline constexpr std::string_view kEpochCsvHeader = "epoch,delta,official,orphans,elapsed_minutes";
void write_epoch_csv(std::ostream& os, const std::vector<EpochLogRow>& rows);

}  // namespace bwr
