#include "bwr/strategy.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bwr {

StrategySpec honest_strategy() {
  StrategySpec s;
  s.name = "honest";
  s.step = [](const CycleWord&) { return Decision::end_cycle; };
  s.resolve = [](const CycleWord& w) {
    Resolution r;
    if (w[0] == Letter::attacker)
      r.off_a = 1;
    else
      r.off_h = 1;
    return r;
  };
  return s;
}

// Wait for a first block. If it is honest the cycle ends; otherwise withhold
// it and let two more blocks arrive, then publish if ahead.
StrategySpec one_plus_two_strategy() {
  StrategySpec s;
  s.name = "one-plus-two";
  s.step = [](const CycleWord& w) {
    if (w.size() == 1 && w[0] == Letter::honest) return Decision::end_cycle;
    return w.size() >= 3 ? Decision::end_cycle : Decision::continue_cycle;
  };
  s.resolve = [](const CycleWord& w) {
    const auto a = w.count_attacker();
    const auto b = w.count_honest();
    Resolution r;
    if (a > b) {
      r.off_a = a;
      r.orph_h = b;
    } else {
      r.off_h = b;
      r.orph_a = a;
    }
    return r;
  };
  return s;
}

StrategySpec builtin_strategy(const std::string& name) {
  if (name == "honest") return honest_strategy();
  if (name == "one-plus-two" || name == "1+2") return one_plus_two_strategy();
  throw ParamError("unknown strategy '" + name + "'");
}

bool partitions_word(const CycleWord& word, const Resolution& r) {
  if (r.off_a < 0 || r.orph_a < 0 || r.orph_pub_a < 0 || r.off_h < 0 || r.orph_h < 0) return false;
  return r.off_a + r.orph_a == word.count_attacker() && r.off_h + r.orph_h == word.count_honest() &&
         r.orph_pub_a <= r.orph_a;
}

bool is_fork_choice_legal(const CycleWord& word, const Resolution& r) {
  if (word.empty() || !partitions_word(word, r)) return false;
  const std::int64_t b = word.count_honest();
  const bool honest_stands = r.off_a == 0 && r.orph_h == 0;
  const bool attacker_wins = r.off_h == 0 && r.orph_h == b && r.off_a > b && r.orph_pub_a == 0;
  return honest_stands || attacker_wins;
}

std::vector<Resolution> legal_resolutions(const CycleWord& word, bool reveal_choices) {
  const std::int64_t a = word.count_attacker();
  const std::int64_t b = word.count_honest();
  std::vector<Resolution> out;
  const std::int64_t max_reveal = reveal_choices ? a : 0;
  for (std::int64_t reveal = 0; reveal <= max_reveal; ++reveal)
    out.push_back(Resolution{0, a, reveal, b, 0});
  for (std::int64_t k = b + 1; k <= a; ++k) out.push_back(Resolution{k, a - k, 0, 0, b});
  return out;
}

CycleRecord make_record(const CycleWord& word, const Resolution& res, double x, std::optional<double> duration) {
  CycleRecord rec;
  rec.word = word;
  rec.off_a = res.off_a;
  rec.orph_a = res.orph_a;
  rec.orph_pub_a = res.orph_pub_a;
  rec.off_h = res.off_h;
  rec.orph_h = res.orph_h;
  rec.g = res.off_a;
  rec.h = res.off_a + res.off_h;
  // Honest orphans are public; attacker orphans count only once revealed.
  rec.d = rec.h + res.orph_h + res.orph_pub_a;
  rec.duration = duration;
  rec.reward = static_cast<double>(rec.g) + x * static_cast<double>(res.orph_pub_a);
  return rec;
}

namespace {

void walk(const StrategySpec& s, const CycleWord& prefix, RuleTable& out) {
  for (Letter l : {Letter::attacker, Letter::honest}) {
    CycleWord w = prefix.with(l);
    if (s.step(w) == Decision::end_cycle) {
      out.emplace(w, s.resolve(w));
    } else {
      if (static_cast<int>(w.size()) >= s.max_cycle_length)
        throw ParamError("strategy '" + s.name + "' exceeds its cycle bound at word " + w.str());
      walk(s, w, out);
    }
  }
}

}  // namespace

RuleTable terminal_table(const StrategySpec& strategy) {
  RuleTable out;
  walk(strategy, CycleWord{}, out);
  return out;
}

StrategySpec word_rule_strategy(const RuleTable& rules, int bound, std::string name) {
  if (bound < 1) throw ParamError("cycle bound must be positive");
  if (rules.empty()) throw ParamError("word rule strategy needs at least one terminal");

  std::set<std::string> prefixes;
  for (const auto& [word, res] : rules) {
    if (word.empty()) throw ParamError("empty terminal word");
    if (static_cast<int>(word.size()) > bound)
      throw ParamError("terminal " + word.str() + " longer than bound " + std::to_string(bound));
    if (!partitions_word(word, res)) throw ParamError("resolution of " + word.str() + " violates accounting");
    if (!is_fork_choice_legal(word, res))
      throw ParamError("resolution of " + word.str() + " violates fork choice");
    for (std::size_t i = 0; i < word.size(); ++i) prefixes.insert(word.str().substr(0, i));
  }
  for (const auto& p : prefixes) {
    if (rules.contains(CycleWord(p))) throw ParamError("terminal " + p + " is a prefix of another terminal");
    for (char c : {'A', 'B'}) {
      const std::string child = p + c;
      if (!prefixes.contains(child) && !rules.contains(CycleWord(child)))
        throw ParamError("terminals are not a complete prefix code: no terminal extends " + child);
    }
  }

  StrategySpec s;
  s.name = std::move(name);
  s.max_cycle_length = bound;
  s.step = [rules](const CycleWord& w) {
    return rules.contains(w) ? Decision::end_cycle : Decision::continue_cycle;
  };
  s.resolve = [rules](const CycleWord& w) {
    auto it = rules.find(w);
    if (it == rules.end()) throw std::logic_error("no resolution for word " + w.str());
    return it->second;
  };
  return s;
}

CycleRecord run_cycle(const StrategySpec& strategy, const NetworkParams& params, CounterStream& rng,
                      std::optional<double> block_rate) {
  CycleWord word;
  double elapsed = 0.0;
  while (true) {
    word.push_back(rng.bernoulli(params.q) ? Letter::attacker : Letter::honest);
    if (block_rate) elapsed += rng.exponential(*block_rate);
    if (strategy.step(word) == Decision::end_cycle) break;
    if (static_cast<int>(word.size()) >= strategy.max_cycle_length)
      throw std::logic_error("strategy '" + strategy.name + "' did not end within its bound");
  }
  std::optional<double> duration;
  if (block_rate) duration = elapsed;
  return make_record(word, strategy.resolve(word), params.orphan_reward_x, duration);
}

namespace {

void grow_random(CounterStream& rng, const CycleWord& prefix, int max_depth, double stop_prob, RuleTable& out) {
  for (Letter l : {Letter::attacker, Letter::honest}) {
    CycleWord w = prefix.with(l);
    const bool leaf = static_cast<int>(w.size()) >= max_depth || rng.bernoulli(stop_prob);
    if (leaf) {
      auto options = legal_resolutions(w);
      out.emplace(w, options[static_cast<std::size_t>(rng.uniform_int(0, std::ssize(options) - 1))]);
    } else {
      grow_random(rng, w, max_depth, stop_prob, out);
    }
  }
}

}  // namespace

RuleTable random_rule_table(CounterStream& rng, int max_depth, double stop_prob) {
  if (max_depth < 1) throw ParamError("max_depth must be positive");
  RuleTable out;
  grow_random(rng, CycleWord{}, max_depth, stop_prob, out);
  return out;
}

// ---------------------------------------------------------------------------
// Word-rule files

RuleTable read_rule_table(std::istream& is) {
  std::string line;
  std::vector<std::string> header;
  std::size_t line_no = 0;
  while (header.empty() && std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    header = split_csv_line(line);
  }
  if (header.empty()) throw ParamError("word rule file has no header");

  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParamError("word rule file missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  static const std::set<std::string> known = {"word",  "g",      "h",          "d",     "duration", "off_a",
                                              "orph_a", "orph_pub_a", "off_h", "orph_h",   "reward"};
  for (const auto& h : header)
    if (!known.contains(h)) throw ParamError("word rule file has unknown column '" + h + "'");

  const auto c_word = column("word");
  const auto c_off_a = column("off_a");
  const auto c_orph_a = column("orph_a");
  const auto c_orph_pub_a = column("orph_pub_a");
  const auto c_off_h = column("off_h");
  const auto c_orph_h = column("orph_h");

  RuleTable rules;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != header.size())
      throw ParamError("word rule file line " + std::to_string(line_no) + ": wrong field count");
    auto num = [&](std::size_t c) {
      try {
        std::size_t used = 0;
        long long v = std::stoll(f[c], &used);
        if (used != f[c].size()) throw std::invalid_argument("");
        return static_cast<std::int64_t>(v);
      } catch (const std::exception&) {
        throw ParamError("word rule file line " + std::to_string(line_no) + ": bad count '" + f[c] + "'");
      }
    };
    CycleWord w(f[c_word]);
    Resolution r{num(c_off_a), num(c_orph_a), num(c_orph_pub_a), num(c_off_h), num(c_orph_h)};
    if (!rules.emplace(w, r).second) throw ParamError("duplicate terminal " + w.str());
  }
  return rules;
}

void write_rule_table(std::ostream& os, const RuleTable& rules) {
  os << "word,off_a,orph_a,orph_pub_a,off_h,orph_h\n";
  for (const auto& [w, r] : rules)
    os << w.str() << ',' << r.off_a << ',' << r.orph_a << ',' << r.orph_pub_a << ',' << r.off_h << ',' << r.orph_h
       << '\n';
}

StrategySpec load_word_rule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParamError("cannot open word rule file '" + path + "'");
  return word_rule_strategy(read_rule_table(in), kDefaultMaxCycleLength, path);
}

}  // namespace bwr
