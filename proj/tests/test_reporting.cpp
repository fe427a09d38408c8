#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "bwr/reporting.hpp"

using namespace bwr;

namespace {

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) out.push_back(split_csv_line(line));
  return out;
}

ExperimentConfig cfg_with(std::initializer_list<std::pair<const char*, const char*>> kv) {
  ExperimentConfig cfg;
  for (const auto& [k, v] : kv) apply_setting(cfg, k, v);
  return cfg;
}

}  // namespace

TEST_CASE("q grid parsing") {
  const auto g = parse_q_grid("0.05:0.45:0.05");
  REQUIRE(g.size() == 9);
  CHECK(g.front() == 0.05);
  CHECK(g.back() == 0.45);
  CHECK(parse_q_grid("0.1, 0.2,0.3").size() == 3);
  CHECK_THROWS_AS(parse_q_grid("0.3,0.2"), ParamError);
  CHECK_THROWS_AS(parse_q_grid("0.0:0.5:0.1"), ParamError);
  CHECK_THROWS_AS(parse_q_grid("0.1:0.5"), ParamError);
  CHECK_THROWS_AS(parse_q_grid("0.1:0.5:0"), ParamError);
  CHECK_THROWS_AS(parse_q_grid("a,b"), ParamError);
}

TEST_CASE("config text parsing and overrides") {
  const auto kv = parse_config_text("# experiment\nq = 0.4\n\nvariant=orphan\n seed=12 \n");
  CHECK(kv.at("q") == "0.4");
  CHECK(kv.at("variant") == "orphan");
  CHECK(kv.at("seed") == "12");
  CHECK_THROWS_AS(parse_config_text("q 0.4\n"), ParamError);

  ExperimentConfig cfg;
  for (const auto& [k, v] : kv) apply_setting(cfg, k, v);
  apply_setting(cfg, "q", "0.3");  // flag wins over file
  CHECK(*cfg.q == 0.3);
  CHECK(cfg.variant == Protocol::orphan);
  CHECK(cfg.seed == 12u);
  CHECK_THROWS_AS(apply_setting(cfg, "speed", "1"), ParamError);
  CHECK_THROWS_AS(apply_setting(cfg, "cycles", "many"), ParamError);
  CHECK_THROWS_AS(apply_setting(cfg, "format", "xml"), ParamError);
  CHECK_THROWS_AS(apply_setting(cfg, "workers", "0"), ParamError);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(validate_config(ExperimentConfig{}), ParamError);  // no q
  CHECK_THROWS_AS(validate_config(cfg_with({{"q", "1.1"}})), ParamError);
  CHECK_THROWS_AS(validate_config(cfg_with({{"q", "0.3"}, {"x", "2"}})), ParamError);
  CHECK_THROWS_AS(validate_config(cfg_with({{"q", "0.3"}, {"strategy", "selfish"}})), ParamError);
  CHECK_THROWS_AS(validate_config(cfg_with({{"q", "0.3"}, {"longrun", "true"}, {"bound", "true"}})), ParamError);
  CHECK_NOTHROW(validate_config(cfg_with({{"q", "0.3"}})));
}

TEST_CASE("analytic command") {
  std::stringstream out;
  const auto cfg = cfg_with({{"strategy", "one-plus-two"}, {"q-grid", "0.05:0.45:0.05"}, {"variant", "standard"}});
  CHECK(cmd_analytic(cfg, out) == kExitOk);
  const auto rows = csv_rows(out.str());
  REQUIRE(rows.size() == 10);
  CHECK(rows[0][0] == "q");
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::abs(std::stod(rows[i][1]) - std::stod(rows[i][2])) < 1e-12);

  std::stringstream one;
  CHECK(cmd_analytic(cfg_with({{"strategy", "honest"}, {"q", "0.3"}}), one) == kExitOk);
  CHECK(std::stod(csv_rows(one.str())[1][1]) == doctest::Approx(0.3).epsilon(1e-14));

  std::stringstream orphan;
  CHECK(cmd_analytic(cfg_with({{"q", "0.4"}, {"variant", "orphan"}}), orphan) == kExitOk);
  CHECK(std::stod(csv_rows(orphan.str())[1][6]) == doctest::Approx(-0.0864).epsilon(1e-12));
}

TEST_CASE("threshold command") {
  std::stringstream a, b, c;
  CHECK(cmd_threshold(cfg_with({}), a) == kExitOk);
  const auto ra = csv_rows(a.str());
  CHECK(ra[1][3] == "root");
  CHECK(std::stod(ra[1][4]) == doctest::Approx(0.414213562).epsilon(1e-9));

  cmd_threshold(cfg_with({{"variant", "orphan"}}), b);
  CHECK(csv_rows(b.str())[1][3] == "none");
  cmd_threshold(cfg_with({{"strategy", "honest"}, {"format", "jsonl"}}), c);
  CHECK(nlohmann::json::parse(c.str())["result"] == "identically_zero");
}

TEST_CASE("simulate command writes re-parseable, reproducible CSV") {
  const auto cfg = cfg_with({{"q", "0.45"}, {"x", "0.5"}, {"cycles", "20000"}, {"seed", "42"}});
  std::stringstream data1, data2, sum1, sum2;
  CHECK(cmd_simulate(cfg, &data1, sum1) == kExitOk);
  CHECK(cmd_simulate(cfg, &data2, sum2) == kExitOk);
  CHECK(data1.str() == data2.str());
  CHECK(sum1.str() == sum2.str());

  const auto records = read_cycle_csv(data1);
  CHECK(records.size() == 20000);
  for (const auto& r : records) CHECK(check_accounting(r, 0.5));

  auto threaded = cfg;
  threaded.workers = 3;
  std::stringstream sum3;
  CHECK(cmd_simulate(threaded, nullptr, sum3) == kExitOk);
  CHECK(sum3.str() == sum1.str());
}

TEST_CASE("simulate command diagnostics") {
  std::stringstream s;
  const auto m = cfg_with({{"q", "0.4"}, {"martingale", "true"}, {"cycles", "100000"}, {"format", "jsonl"}});
  CHECK(cmd_simulate(m, nullptr, s) == kExitOk);
  CHECK(nlohmann::json::parse(s.str())["pass"] == true);

  std::stringstream b;
  const auto bound = cfg_with({{"q", "0.4"}, {"bound", "true"}, {"cycles", "100000"}, {"format", "jsonl"}});
  CHECK(cmd_simulate(bound, nullptr, b) == kExitOk);

  std::stringstream lr_data, lr_sum;
  const auto lr = cfg_with({{"q", "0.45"}, {"longrun", "true"}, {"variant", "orphan"}, {"epochs", "20"},
                            {"warmup", "5"}, {"n0", "64"}, {"replications", "50"}, {"format", "jsonl"}});
  CHECK(cmd_simulate(lr, &lr_data, lr_sum) == kExitOk);
  const auto j = nlohmann::json::parse(lr_sum.str());
  CHECK(j["revenue_per_tau0"].get<double>() < 0.45);
  CHECK(csv_rows(lr_data.str()).size() == 21);
}

TEST_CASE("sweep command") {
  std::stringstream out;
  CHECK(cmd_sweep(cfg_with({{"q-grid", "0.2:0.4:0.1"}, {"cycles", "50000"}}), out) == kExitOk);
  const auto rows = csv_rows(out.str());
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(std::abs(std::stod(rows[i][4])) < 4.0);
}

TEST_CASE("rule file strategies through the config") {
  const std::string path = "test_reporting_rules.csv";
  {
    std::ofstream f(path);
    f << "word,off_a,orph_a,orph_pub_a,off_h,orph_h\nB,0,0,0,1,0\nAAA,3,0,0,0,0\nAAB,2,0,0,0,1\n"
         "ABA,2,0,0,0,1\nABB,0,1,0,2,0\n";
  }
  std::stringstream a, b;
  cmd_analytic(cfg_with({{"rules", path.c_str()}, {"q", "0.45"}}), a);
  cmd_analytic(cfg_with({{"q", "0.45"}}), b);
  CHECK(csv_rows(a.str())[1][1] == csv_rows(b.str())[1][1]);
  std::remove(path.c_str());
}
