#pragma once

// Core domain types: network parameters, cycle words and per-cycle accounting.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bwr {

/// Raised for any invalid parameter or malformed input.
class ParamError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

enum class Letter : char { attacker = 'A', honest = 'B' };

/// Which quantity the difficulty adjustment tracks.
///   none     - constant difficulty, revenue measured per unit of time
///   standard - official chain height (current Bitcoin rule)
///   orphan   - official height plus reported orphans
enum class Protocol { none, standard, orphan };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view s);

struct NetworkParams {
  double q = 0.5;
  double p = 0.5;
  double tau0 = 10.0;
  std::int64_t n0 = 2016;
  double orphan_reward_x = 0.0;
  std::optional<double> hash_honest;
  std::optional<double> hash_attacker;
};

/// Returns a copy with p recomputed as 1 - q. Throws ParamError on any
/// violated invariant.
NetworkParams validate_params(NetworkParams params);

/// Convenience constructor for the common case.
NetworkParams make_params(double q, double x = 0.0, double tau0 = 10.0, std::int64_t n0 = 2016);

/// Ordered block-finder labels of one strategy cycle.
class CycleWord {
public:
  CycleWord() = default;
  explicit CycleWord(std::string_view letters);

  static bool is_valid(std::string_view letters);

  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }
  Letter operator[](std::size_t i) const { return static_cast<Letter>(letters_[i]); }
  int count_attacker() const;
  int count_honest() const;

  void push_back(Letter l) { letters_.push_back(static_cast<char>(l)); }
  CycleWord with(Letter l) const;

  /// p^{#B} q^{#A}
  double probability(double p, double q) const;

  const std::string& str() const { return letters_; }

  auto operator<=>(const CycleWord&) const = default;

private:
  std::string letters_;
};

struct CycleRecord {
  CycleWord word;
  std::int64_t g = 0;
  std::int64_t h = 0;
  std::int64_t d = 0;
  std::optional<double> duration;
  std::int64_t off_a = 0;
  std::int64_t orph_a = 0;
  std::int64_t orph_pub_a = 0;
  std::int64_t off_h = 0;
  std::int64_t orph_h = 0;
  double reward = 0.0;

  /// Progress of the quantity the given protocol's difficulty tracks.
  /// Protocol::none has no such quantity and returns h.
  std::int64_t progress(Protocol protocol) const { return protocol == Protocol::orphan ? d : h; }
};

/// True iff every accounting identity of the record holds. `x` is the orphan
/// reward fraction the record was produced under.
bool check_accounting(const CycleRecord& rec, double x);

enum class EstimateMode { exact, montecarlo };

struct ProfitabilityReport {
  Protocol protocol = Protocol::standard;
  EstimateMode mode = EstimateMode::exact;
  /// Revenue per tau0 in the protocol's equilibrium:
  /// e_reward/e_h (standard), e_reward/e_d (orphan), e_reward*tau0/e_tau (none).
  double gamma = 0.0;
  double e_g = 0.0;
  double e_h = 0.0;
  double e_d = 0.0;
  double e_tau = 0.0;
  double e_reward = 0.0;
  std::optional<double> stderr_gamma;
};

// CSV I/O for cycle records. Columns:
//   word,g,h,d,duration,off_a,orph_a,orph_pub_a,off_h,orph_h,reward
inline constexpr std::string_view kCycleCsvHeader =
    "word,g,h,d,duration,off_a,orph_a,orph_pub_a,off_h,orph_h,reward";

/// Shortest decimal form with at least 15 significant digits.
std::string format_real(double v);

void write_cycle_csv_header(std::ostream& os);
void write_cycle_csv_row(std::ostream& os, const CycleRecord& rec);
std::vector<CycleRecord> read_cycle_csv(std::istream& is);

/// Splits one CSV line on commas; no quoting support (fields never need it).
std::vector<std::string> split_csv_line(std::string_view line);

}  // namespace bwr
