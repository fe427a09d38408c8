#include "bwr/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

namespace bwr {

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::none: return "none";
    case Protocol::standard: return "standard";
    case Protocol::orphan: return "orphan";
  }
  return "?";
}

Protocol parse_protocol(std::string_view s) {
  if (s == "none") return Protocol::none;
  if (s == "standard") return Protocol::standard;
  if (s == "orphan" || s == "modified") return Protocol::orphan;
  throw ParamError("unknown protocol variant '" + std::string(s) + "'");
}

NetworkParams validate_params(NetworkParams params) {
  if (!(params.q > 0.0 && params.q < 1.0)) throw ParamError("q out of range (0,1)");
  if (!(params.tau0 > 0.0) || !std::isfinite(params.tau0)) throw ParamError("tau0 must be positive");
  if (params.n0 < 1) throw ParamError("n0 must be at least 1");
  if (!(params.orphan_reward_x >= 0.0 && params.orphan_reward_x <= 1.0))
    throw ParamError("orphan reward x out of range [0,1]");
  if (params.hash_honest.has_value() != params.hash_attacker.has_value())
    throw ParamError("absolute hashrates must be given together");
  if (params.hash_honest) {
    const double h = *params.hash_honest;
    const double h_att = *params.hash_attacker;
    if (!(h > 0.0) || !(h_att > 0.0)) throw ParamError("absolute hashrates must be positive");
    if (std::abs(params.q - h_att / (h + h_att)) > 1e-12)
      throw ParamError("q inconsistent with absolute hashrates");
  }
  params.p = 1.0 - params.q;
  return params;
}

NetworkParams make_params(double q, double x, double tau0, std::int64_t n0) {
  NetworkParams p;
  p.q = q;
  p.orphan_reward_x = x;
  p.tau0 = tau0;
  p.n0 = n0;
  return validate_params(p);
}

// ---------------------------------------------------------------------------
// CycleWord

bool CycleWord::is_valid(std::string_view letters) {
  return std::all_of(letters.begin(), letters.end(), [](char c) { return c == 'A' || c == 'B'; });
}

CycleWord::CycleWord(std::string_view letters) : letters_(letters) {
  if (!is_valid(letters)) throw ParamError("cycle word may only contain 'A' and 'B': '" + letters_ + "'");
}

int CycleWord::count_attacker() const {
  return static_cast<int>(std::count(letters_.begin(), letters_.end(), 'A'));
}

int CycleWord::count_honest() const {
  return static_cast<int>(std::count(letters_.begin(), letters_.end(), 'B'));
}

CycleWord CycleWord::with(Letter l) const {
  CycleWord w = *this;
  w.push_back(l);
  return w;
}

double CycleWord::probability(double p, double q) const {
  double prob = 1.0;
  for (char c : letters_) prob *= (c == 'A') ? q : p;
  return prob;
}

// ---------------------------------------------------------------------------

bool check_accounting(const CycleRecord& rec, double x) {
  const auto n_a = rec.word.count_attacker();
  const auto n_b = rec.word.count_honest();
  if (rec.word.empty()) return false;
  if (rec.g < 0 || rec.h < 0 || rec.d < 0 || rec.off_a < 0 || rec.orph_a < 0 || rec.orph_pub_a < 0 ||
      rec.off_h < 0 || rec.orph_h < 0)
    return false;
  if (rec.off_a + rec.orph_a != n_a) return false;
  if (rec.off_h + rec.orph_h != n_b) return false;
  if (rec.h != rec.off_a + rec.off_h) return false;
  if (rec.d != rec.h + rec.orph_h + rec.orph_pub_a) return false;
  if (rec.orph_pub_a > rec.orph_a) return false;
  if (rec.g != rec.off_a) return false;
  const double expected_reward = static_cast<double>(rec.g) + x * static_cast<double>(rec.orph_pub_a);
  if (std::abs(rec.reward - expected_reward) > 1e-9 * std::max(1.0, std::abs(expected_reward))) return false;
  if (rec.duration && !(*rec.duration > 0.0)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// CSV

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

void write_cycle_csv_header(std::ostream& os) { os << kCycleCsvHeader << '\n'; }

void write_cycle_csv_row(std::ostream& os, const CycleRecord& rec) {
  os << rec.word.str() << ',' << rec.g << ',' << rec.h << ',' << rec.d << ',';
  if (rec.duration) os << format_real(*rec.duration);
  os << ',' << rec.off_a << ',' << rec.orph_a << ',' << rec.orph_pub_a << ',' << rec.off_h << ','
     << rec.orph_h << ',' << format_real(rec.reward) << '\n';
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    auto field = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.remove_suffix(1);
    while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
    out.emplace_back(field);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

namespace {

std::int64_t parse_int(const std::string& s, std::size_t line_no) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParamError("line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  return v;
}

double parse_real(const std::string& s, std::size_t line_no) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw ParamError("");
    return v;
  } catch (const std::exception&) {
    throw ParamError("line " + std::to_string(line_no) + ": bad number '" + s + "'");
  }
}

}  // namespace

std::vector<CycleRecord> read_cycle_csv(std::istream& is) {
  std::vector<CycleRecord> out;
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(is, line)) throw ParamError("empty cycle CSV");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCycleCsvHeader) throw ParamError("unexpected cycle CSV header: " + line);
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != 11) throw ParamError("line " + std::to_string(line_no) + ": expected 11 fields");
    CycleRecord r;
    r.word = CycleWord(f[0]);
    r.g = parse_int(f[1], line_no);
    r.h = parse_int(f[2], line_no);
    r.d = parse_int(f[3], line_no);
    if (!f[4].empty()) r.duration = parse_real(f[4], line_no);
    r.off_a = parse_int(f[5], line_no);
    r.orph_a = parse_int(f[6], line_no);
    r.orph_pub_a = parse_int(f[7], line_no);
    r.off_h = parse_int(f[8], line_no);
    r.orph_h = parse_int(f[9], line_no);
    r.reward = parse_real(f[10], line_no);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace bwr
