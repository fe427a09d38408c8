#include "doctest.h"

#include <cmath>
#include <sstream>

#include "bwr/analytic.hpp"
#include "bwr/strategy.hpp"

using namespace bwr;

namespace {

RuleTable honest_table() {
  return {{CycleWord("A"), Resolution{1, 0, 0, 0, 0}}, {CycleWord("B"), Resolution{0, 0, 0, 1, 0}}};
}

// Resolutions of the "1+2" cycles written out by hand.
RuleTable one_plus_two_table() {
  return {
      {CycleWord("B"), Resolution{0, 0, 0, 1, 0}},   {CycleWord("AAA"), Resolution{3, 0, 0, 0, 0}},
      {CycleWord("AAB"), Resolution{2, 0, 0, 0, 1}}, {CycleWord("ABA"), Resolution{2, 0, 0, 0, 1}},
      {CycleWord("ABB"), Resolution{0, 1, 0, 2, 0}},
  };
}

}  // namespace

TEST_CASE("honest strategy resolves every block as official") {
  const auto table = terminal_table(honest_strategy());
  REQUIRE(table.size() == 2);
  const auto a = make_record(CycleWord("A"), table.at(CycleWord("A")), 0.0);
  CHECK(a.g == 1);
  CHECK(a.h == 1);
  CHECK(a.d == 1);
  const auto b = make_record(CycleWord("B"), table.at(CycleWord("B")), 0.0);
  CHECK(b.g == 0);
  CHECK(b.h == 1);
  CHECK(b.d == 1);
  for (const auto& [w, r] : table) {
    CHECK(r.orph_a == 0);
    CHECK(r.orph_h == 0);
  }
}

TEST_CASE("one-plus-two terminals and resolutions") {
  const auto table = terminal_table(one_plus_two_strategy());
  CHECK(table == one_plus_two_table());

  const auto aba = make_record(CycleWord("ABA"), table.at(CycleWord("ABA")), 0.0);
  CHECK(aba.g == 2);
  CHECK(aba.h == 2);
  CHECK(aba.d == 3);
  const auto abb = make_record(CycleWord("ABB"), table.at(CycleWord("ABB")), 0.0);
  CHECK(abb.g == 0);
  CHECK(abb.h == 2);
  CHECK(abb.d == 2);
  CHECK(abb.orph_pub_a == 0);
  const auto aab = make_record(CycleWord("AAB"), table.at(CycleWord("AAB")), 0.0);
  CHECK(aab.d == 3);
  const auto aaa = make_record(CycleWord("AAA"), table.at(CycleWord("AAA")), 0.0);
  CHECK(aaa.d == 3);
  CHECK(aaa.g == 3);
}

TEST_CASE("built-in strategies obey fork choice") {
  for (const auto& s : {honest_strategy(), one_plus_two_strategy()}) {
    for (const auto& [w, r] : terminal_table(s)) {
      CHECK(is_fork_choice_legal(w, r));
      // A displacing branch must be strictly longer than what it displaces.
      if (r.orph_h > 0) CHECK(r.off_a > r.orph_h);
      CHECK(r.off_a + r.off_h >= std::max(r.orph_a, r.orph_h));
    }
  }
}

TEST_CASE("fork choice legality") {
  CHECK(is_fork_choice_legal(CycleWord("AAB"), Resolution{2, 0, 0, 0, 1}));
  // tie goes to the honest branch
  CHECK_FALSE(is_fork_choice_legal(CycleWord("AB"), Resolution{1, 0, 0, 0, 1}));
  CHECK(is_fork_choice_legal(CycleWord("AB"), Resolution{0, 1, 0, 1, 0}));
  // attacker official blocks exceeding the winning branch
  CHECK_FALSE(is_fork_choice_legal(CycleWord("ABB"), Resolution{1, 0, 0, 0, 2}));
  // partial publication of a winning branch is legal, leftover stays private
  CHECK(is_fork_choice_legal(CycleWord("AAAB"), Resolution{2, 1, 0, 0, 1}));
  CHECK_FALSE(is_fork_choice_legal(CycleWord("AAAB"), Resolution{2, 1, 1, 0, 1}));
  // mixing official blocks from both branches is not reachable
  CHECK_FALSE(is_fork_choice_legal(CycleWord("AB"), Resolution{1, 0, 0, 1, 0}));

  for (const auto& w : {"A", "B", "AB", "BAA", "AAAB", "ABABB"}) {
    for (const auto& r : legal_resolutions(CycleWord(w))) CHECK(is_fork_choice_legal(CycleWord(w), r));
  }
  CHECK(legal_resolutions(CycleWord("AAA")).size() == 4 + 3);
  CHECK(legal_resolutions(CycleWord("AAA"), false).size() == 1 + 3);
}

TEST_CASE("word rule strategy reconstructs the built-ins") {
  const auto honest = word_rule_strategy(honest_table());
  CHECK(terminal_table(honest) == terminal_table(honest_strategy()));

  const auto one_two = word_rule_strategy(one_plus_two_table());
  CHECK(terminal_table(one_two) == terminal_table(one_plus_two_strategy()));
  for (double q : {0.1, 0.3, 0.45, 0.7}) {
    const auto params = make_params(q);
    const auto a = exact_report(one_two, params, Protocol::standard);
    const auto b = exact_report(one_plus_two_strategy(), params, Protocol::standard);
    CHECK(a.gamma == b.gamma);
    CHECK(a.e_d == b.e_d);
  }
}

TEST_CASE("orphaning the attacker's own block gives nothing") {
  RuleTable t = honest_table();
  t[CycleWord("A")] = Resolution{0, 1, 0, 0, 0};
  const auto s = word_rule_strategy(t);
  const auto r = exact_report(s, make_params(0.3), Protocol::standard);
  CHECK(r.e_g == 0.0);
  CHECK(r.gamma == 0.0);
}

TEST_CASE("word rule strategy rejects bad tables") {
  CHECK_THROWS_AS(word_rule_strategy({}), ParamError);

  RuleTable incomplete = {{CycleWord("A"), Resolution{1, 0, 0, 0, 0}}};
  CHECK_THROWS_AS(word_rule_strategy(incomplete), ParamError);

  RuleTable overlap = honest_table();
  overlap[CycleWord("AB")] = Resolution{0, 1, 0, 1, 0};
  CHECK_THROWS_AS(word_rule_strategy(overlap), ParamError);

  RuleTable illegal = honest_table();
  illegal[CycleWord("B")] = Resolution{0, 0, 0, 0, 1};
  CHECK_THROWS_AS(word_rule_strategy(illegal), ParamError);

  RuleTable accounting = honest_table();
  accounting[CycleWord("A")] = Resolution{1, 1, 0, 0, 0};
  CHECK_THROWS_AS(word_rule_strategy(accounting), ParamError);

  CHECK_THROWS_AS(word_rule_strategy(one_plus_two_table(), 2), ParamError);
}

TEST_CASE("run_cycle is deterministic and ends on a terminal") {
  const auto params = make_params(0.4);
  const auto s = one_plus_two_strategy();
  const auto terminals = terminal_table(s);
  CounterStream a(99), b(99);
  for (int i = 0; i < 1000; ++i) {
    const auto ra = run_cycle(s, params, a, 0.1);
    const auto rb = run_cycle(s, params, b, 0.1);
    CHECK(ra.word == rb.word);
    CHECK(*ra.duration == *rb.duration);
    CHECK(terminals.contains(ra.word));
    CHECK(*ra.duration > 0.0);
  }
  CounterStream c(5);
  CHECK_FALSE(run_cycle(s, params, c).duration.has_value());
}

TEST_CASE("honest cycles have a single block") {
  CounterStream rng(3);
  const auto params = make_params(0.3);
  for (int i = 0; i < 100; ++i) CHECK(run_cycle(honest_strategy(), params, rng).word.size() == 1);
}

TEST_CASE("one-plus-two word frequencies match p^#B q^#A") {
  const auto params = make_params(0.4);
  const auto s = one_plus_two_strategy();
  CounterStream rng(CounterStream::derive_key(2024, 0));
  constexpr int kN = 200000;
  std::map<CycleWord, int> counts;
  for (int i = 0; i < kN; ++i) ++counts[run_cycle(s, params, rng).word];
  for (const auto& [w, r] : terminal_table(s)) {
    const double prob = w.probability(params.p, params.q);
    const double se = std::sqrt(prob * (1 - prob) / kN);
    CHECK(std::abs(counts[w] / double(kN) - prob) < 4.0 * se);  // five words tested jointly
  }
}

TEST_CASE("runaway strategies are caught") {
  StrategySpec forever;
  forever.name = "forever";
  forever.step = [](const CycleWord&) { return Decision::continue_cycle; };
  forever.resolve = [](const CycleWord&) { return Resolution{}; };
  forever.max_cycle_length = 6;
  CHECK_THROWS_AS(terminal_table(forever), ParamError);
  CounterStream rng(1);
  CHECK_THROWS_AS(run_cycle(forever, make_params(0.5), rng), std::logic_error);
}

TEST_CASE("random rule tables are always accepted") {
  CounterStream rng(CounterStream::derive_key(17, 3));
  for (int i = 0; i < 300; ++i) {
    const auto table = random_rule_table(rng, 1 + i % 5);
    const auto s = word_rule_strategy(table);
    CHECK(terminal_table(s) == table);
    CHECK(enumerate(s, make_params(0.3)).total_probability() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("rule files round trip and validate") {
  std::stringstream ss;
  write_rule_table(ss, one_plus_two_table());
  CHECK(read_rule_table(ss) == one_plus_two_table());

  std::stringstream with_extras(
      "# honest\n"
      "word,g,h,d,off_a,orph_a,orph_pub_a,off_h,orph_h,reward\n"
      "A,1,1,1,1,0,0,0,0,1\n"
      "B,0,1,1,0,0,0,1,0,0\n");
  CHECK(read_rule_table(with_extras) == honest_table());

  std::stringstream missing("word,off_a,orph_a\nA,1,0\n");
  CHECK_THROWS_AS(read_rule_table(missing), ParamError);
  std::stringstream unknown("word,off_a,orph_a,orph_pub_a,off_h,orph_h,gamma\nA,1,0,0,0,0,1\n");
  CHECK_THROWS_AS(read_rule_table(unknown), ParamError);
  std::stringstream dup("word,off_a,orph_a,orph_pub_a,off_h,orph_h\nA,1,0,0,0,0\nA,1,0,0,0,0\n");
  CHECK_THROWS_AS(read_rule_table(dup), ParamError);
  CHECK_THROWS_AS(load_word_rule_file("/nonexistent/rules.csv"), ParamError);
}

TEST_CASE("builtin lookup") {
  CHECK(builtin_strategy("1+2").name == "one-plus-two");
  CHECK(builtin_strategy("honest").name == "honest");
  CHECK_THROWS_AS(builtin_strategy("stubborn"), ParamError);
}
