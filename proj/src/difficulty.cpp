#include "bwr/difficulty.hpp"

#include <ostream>
#include <string>

namespace bwr {

namespace {

void require_elapsed(const DifficultyState& s) {
  if (!(s.delta > 0.0)) throw ParamError("difficulty must be positive");
  if (!(s.epoch_elapsed > 0.0)) throw ParamError("epoch elapsed time must be positive");
}

void require_complete(const DifficultyState& s, std::int64_t n0) {
  if (s.official_in_epoch != n0)
    throw ParamError("retarget requested with " + std::to_string(s.official_in_epoch) + " of " +
                     std::to_string(n0) + " official blocks");
}

}  // namespace

double retarget_standard(const DifficultyState& state, std::int64_t n0, double tau0) {
  require_complete(state, n0);
  require_elapsed(state);
  return state.delta * (static_cast<double>(n0) * tau0) / state.epoch_elapsed;
}

double retarget_general(const DifficultyState& state, double d_progress, double tau0) {
  if (!(d_progress > 0.0)) throw ParamError("difficulty function progress must be positive");
  require_elapsed(state);
  return state.delta * (d_progress * tau0) / state.epoch_elapsed;
}

double retarget_orphan(const DifficultyState& state, std::int64_t n0, double tau0) {
  require_complete(state, n0);
  require_elapsed(state);
  return state.delta * (static_cast<double>(n0 + state.orphans_in_epoch) * tau0) / state.epoch_elapsed;
}

BlockRates network_rate(const NetworkParams& params, double delta, double delta_ref) {
  if (!(delta > 0.0) || !(delta_ref > 0.0)) throw ParamError("difficulty must be positive");
  BlockRates r;
  r.total = (1.0 / params.tau0) * (delta_ref / delta);
  r.honest = params.p * r.total;
  r.attacker = params.q * r.total;
  return r;
}

void write_epoch_csv(std::ostream& os, const std::vector<EpochLogRow>& rows) {
  os << kEpochCsvHeader << '\n';
  for (const auto& r : rows)
    os << r.epoch << ',' << format_real(r.delta) << ',' << r.official << ',' << r.orphans << ','
       << format_real(r.elapsed_minutes) << '\n';
}

}  // namespace bwr
