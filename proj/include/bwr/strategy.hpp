#pragma once

// Finite mining strategies as controllers over block-arrival letters.
//
// Fork model: during a cycle the attacker mines one private branch rooted at
// the cycle's starting tip while honest miners extend the public chain. At the
// end of the cycle either
//   - the honest branch stands: every honest block is official, every
//     attacker block is orphaned (the attacker may reveal any of them), or
//   - the attacker publishes the first k blocks of its branch, k > #B, which
//     displace every honest block of the cycle. Blocks beyond k stay private.
// Ties go to the honest branch.

#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bwr/model.hpp"
#include "bwr/random.hpp"

namespace bwr {

enum class Decision { continue_cycle, end_cycle };

struct Resolution {
  std::int64_t off_a = 0;
  std::int64_t orph_a = 0;
  std::int64_t orph_pub_a = 0;
  std::int64_t off_h = 0;
  std::int64_t orph_h = 0;

  auto operator<=>(const Resolution&) const = default;
};

inline constexpr int kDefaultMaxCycleLength = 64;

struct StrategySpec {
  std::string name;
  std::function<Decision(const CycleWord&)> step;
  std::function<Resolution(const CycleWord&)> resolve;
  int max_cycle_length = kDefaultMaxCycleLength;
};

using RuleTable = std::map<CycleWord, Resolution>;

StrategySpec honest_strategy();
StrategySpec one_plus_two_strategy();

/// Table-driven strategy. Throws ParamError unless the terminals form a
/// complete, non-overlapping prefix code no longer than `bound` and every
/// resolution is fork-choice legal for its word.
StrategySpec word_rule_strategy(const RuleTable& rules, int bound = kDefaultMaxCycleLength,
                                std::string name = "word-rule");

/// Looks up "honest" / "one-plus-two" (alias "1+2").
StrategySpec builtin_strategy(const std::string& name);

/// Letters of `word` are partitioned by the resolution's counters.
bool partitions_word(const CycleWord& word, const Resolution& res);
/// Resolution is reachable under the fork model above.
bool is_fork_choice_legal(const CycleWord& word, const Resolution& res);

/// Every legal resolution of `word`. With `reveal_choices` false only
/// orph_pub_a = 0 variants are listed.
std::vector<Resolution> legal_resolutions(const CycleWord& word, bool reveal_choices = true);

CycleRecord make_record(const CycleWord& word, const Resolution& res, double x,
                        std::optional<double> duration = std::nullopt);

/// Walks the strategy's decision tree. Throws ParamError if some branch
/// reaches max_cycle_length without ending.
RuleTable terminal_table(const StrategySpec& strategy);

/// Plays one cycle. Letters are Bernoulli(q) attacker wins drawn from `rng`.
/// With a block rate, each block also consumes one exponential draw and the
/// record's duration is their sum.
CycleRecord run_cycle(const StrategySpec& strategy, const NetworkParams& params, CounterStream& rng,
                      std::optional<double> block_rate = std::nullopt);

/// Random legal table strategy with words of length <= max_depth. Leaves are
/// cut with probability `stop_prob` at each depth >= 1.
RuleTable random_rule_table(CounterStream& rng, int max_depth, double stop_prob = 0.35);

// Word-rule files: CSV with header naming at least
//   word,off_a,orph_a,orph_pub_a,off_h,orph_h
// Other CycleRecord columns (g,h,d,duration,reward) are accepted and ignored.
// Blank lines and lines starting with '#' are skipped.
RuleTable read_rule_table(std::istream& is);
void write_rule_table(std::ostream& os, const RuleTable& rules);
StrategySpec load_word_rule_file(const std::string& path);

}  // namespace bwr
