#include "bwr/analytic.hpp"

#include <cmath>
#include <ostream>

namespace bwr {

double CycleDistribution::total_probability() const {
  double total = 0.0;
  for (const auto& [w, e] : entries) total += e.probability;
  return total;
}

CycleDistribution enumerate(const StrategySpec& strategy, const NetworkParams& params) {
  CycleDistribution dist;
  for (const auto& [word, res] : terminal_table(strategy)) {
    dist.entries.emplace(word, WeightedRecord{word.probability(params.p, params.q),
                                              make_record(word, res, params.orphan_reward_x)});
  }
  return dist;
}

ProfitabilityReport expectations(const CycleDistribution& dist, const NetworkParams& params, Protocol protocol) {
  ProfitabilityReport r;
  r.protocol = protocol;
  r.mode = EstimateMode::exact;
  double e_len = 0.0;
  for (const auto& [word, e] : dist.entries) {
    const auto& rec = e.record;
    r.e_g += e.probability * static_cast<double>(rec.g);
    r.e_h += e.probability * static_cast<double>(rec.h);
    r.e_d += e.probability * static_cast<double>(rec.d);
    r.e_reward += e.probability * rec.reward;
    e_len += e.probability * static_cast<double>(word.size());
  }
  r.e_tau = e_len * params.tau0;
  switch (protocol) {
    case Protocol::none: r.gamma = r.e_reward / e_len; break;
    case Protocol::standard: r.gamma = r.e_reward / r.e_h; break;
    case Protocol::orphan: r.gamma = r.e_reward / r.e_d; break;
  }
  return r;
}

ProfitabilityReport exact_report(const StrategySpec& strategy, const NetworkParams& params, Protocol protocol) {
  return expectations(enumerate(strategy, params), params, protocol);
}

double closed_form_gamma_one_plus_two(double q) {
  if (!(q > 0.0 && q < 1.0)) throw ParamError("q out of range (0,1)");
  return q * q * (4.0 - q) / (1.0 + q + q * q * q);
}

std::optional<double> closed_form_gamma(const std::string& name, double q, Protocol protocol) {
  if (!(q > 0.0 && q < 1.0)) throw ParamError("q out of range (0,1)");
  if (name == "honest") return q;
  if (name != "one-plus-two") return std::nullopt;
  const double p = 1.0 - q;
  const double e_g = q * q * (4.0 - q);
  switch (protocol) {
    case Protocol::standard: return closed_form_gamma_one_plus_two(q);
    // E[G] - q E[D] = -p^3 q
    case Protocol::orphan: return q * e_g / (e_g + p * p * p * q);
    // E[length] = 1 + 2q
    case Protocol::none: return e_g / (1.0 + 2.0 * q);
  }
  return std::nullopt;
}

namespace {

double gamma_minus_q(const StrategySpec& s, double q, Protocol protocol, double x) {
  NetworkParams params = make_params(q, x);
  return exact_report(s, params, protocol).gamma - q;
}

int sign_of(double v) {
  constexpr double kZero = 1e-13;
  return v > kZero ? 1 : (v < -kZero ? -1 : 0);
}

}  // namespace

ThresholdResult threshold(const StrategySpec& strategy, Protocol protocol, double x) {
  constexpr int kGrid = 1000;
  constexpr double kLo = 1e-6;
  constexpr double kHi = 1.0 - 1e-6;
  std::vector<double> qs(kGrid + 1);
  std::vector<int> signs(kGrid + 1);
  bool all_zero = true;
  for (int i = 0; i <= kGrid; ++i) {
    qs[i] = kLo + (kHi - kLo) * i / kGrid;
    signs[i] = sign_of(gamma_minus_q(strategy, qs[i], protocol, x));
    all_zero = all_zero && signs[i] == 0;
  }
  if (all_zero) return {ThresholdResult::Kind::identically_zero, 0.0};

  for (int i = 0; i < kGrid; ++i) {
    if (signs[i] == 0 && i > 0 && signs[i - 1] != 0 && signs[i + 1] != 0 && signs[i - 1] != signs[i + 1])
      return {ThresholdResult::Kind::root, qs[i]};
    if (signs[i] != 0 && signs[i + 1] != 0 && signs[i] != signs[i + 1]) {
      double lo = qs[i];
      double hi = qs[i + 1];
      const int s_lo = signs[i];
      while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        const int s_mid = sign_of(gamma_minus_q(strategy, mid, protocol, x));
        if (s_mid == 0) return {ThresholdResult::Kind::root, mid};
        (s_mid == s_lo ? lo : hi) = mid;
      }
      return {ThresholdResult::Kind::root, 0.5 * (lo + hi)};
    }
  }
  return {ThresholdResult::Kind::none, 0.0};
}

DominanceReport verify_dominance(const StrategySpec& strategy, std::span<const double> q_grid, double x) {
  constexpr double kTol = 1e-12;
  DominanceReport report;
  for (double q : q_grid) {
    const NetworkParams params = make_params(q, x);
    const auto dist = enumerate(strategy, params);
    const auto r = expectations(dist, params, Protocol::orphan);

    bool unpaid_orphans = false;
    for (const auto& [w, e] : dist.entries) {
      const auto& rec = e.record;
      if (rec.orph_a > rec.orph_pub_a || (rec.orph_pub_a > 0 && x < 1.0)) unpaid_orphans = true;
    }

    DominancePoint pt;
    pt.q = q;
    pt.x = x;
    pt.e_reward = r.e_reward;
    pt.e_d = r.e_d;
    pt.margin = r.e_reward - q * r.e_d;
    pt.equality_allowed = !unpaid_orphans;
    pt.ok = pt.equality_allowed ? std::abs(pt.margin) <= kTol : pt.margin < -kTol;
    report.all_ok = report.all_ok && pt.ok;
    report.points.push_back(pt);
  }
  return report;
}

// ---------------------------------------------------------------------------
// Exhaustive strategy search

namespace {

using Code = std::vector<CycleWord>;

std::vector<Code> prefix_codes(const CycleWord& node, int max_length) {
  std::vector<Code> out;
  if (!node.empty()) out.push_back(Code{node});
  if (static_cast<int>(node.size()) < max_length) {
    const auto left = prefix_codes(node.with(Letter::attacker), max_length);
    const auto right = prefix_codes(node.with(Letter::honest), max_length);
    for (const auto& l : left) {
      for (const auto& r : right) {
        Code c = l;
        c.insert(c.end(), r.begin(), r.end());
        out.push_back(std::move(c));
      }
    }
  }
  return out;
}

}  // namespace

SearchResult best_strategy_up_to(int max_length, double q) {
  if (max_length < 1) throw ParamError("max_length must be positive");
  const NetworkParams params = make_params(q);
  SearchResult best;
  best.gamma = -1.0;

  for (const auto& code : prefix_codes(CycleWord{}, max_length)) {
    std::vector<std::vector<Resolution>> options;
    std::vector<double> prob;
    for (const auto& w : code) {
      options.push_back(legal_resolutions(w, false));
      prob.push_back(w.probability(params.p, params.q));
    }
    std::vector<std::size_t> pick(code.size(), 0);
    while (true) {
      double e_g = 0.0;
      double e_h = 0.0;
      for (std::size_t i = 0; i < code.size(); ++i) {
        const auto& r = options[i][pick[i]];
        e_g += prob[i] * static_cast<double>(r.off_a);
        e_h += prob[i] * static_cast<double>(r.off_a + r.off_h);
      }
      ++best.candidates;
      const double gamma = e_g / e_h;
      if (gamma > best.gamma + 1e-13) {
        best.gamma = gamma;
        best.rules.clear();
        for (std::size_t i = 0; i < code.size(); ++i) best.rules.emplace(code[i], options[i][pick[i]]);
      }
      // odometer
      std::size_t i = 0;
      while (i < pick.size() && ++pick[i] == options[i].size()) pick[i++] = 0;
      if (i == pick.size()) break;
    }
  }
  best.strategy = word_rule_strategy(best.rules, max_length, "best-up-to-" + std::to_string(max_length));
  return best;
}

// ---------------------------------------------------------------------------

std::vector<SweepRow> analytic_sweep(const StrategySpec& strategy, std::span<const double> q_grid,
                                     Protocol protocol, double x) {
  std::vector<SweepRow> rows;
  for (double q : q_grid) {
    const NetworkParams params = make_params(q, x);
    const auto r = exact_report(strategy, params, protocol);
    SweepRow row;
    row.q = q;
    row.gamma_exact = r.gamma;
    if (x == 0.0) row.gamma_formula = closed_form_gamma(strategy.name, q, protocol);
    row.e_g = r.e_g;
    row.e_h = r.e_h;
    row.e_d = r.e_d;
    row.margin_modified = r.e_reward - q * r.e_d;
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows) {
  os << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    os << format_real(r.q) << ',' << format_real(r.gamma_exact) << ',';
    if (r.gamma_formula) os << format_real(*r.gamma_formula);
    os << ',' << format_real(r.e_g) << ',' << format_real(r.e_h) << ',' << format_real(r.e_d) << ','
       << format_real(r.margin_modified) << '\n';
  }
}

}  // namespace bwr
