#include <doctest.h>

#include <sstream>

#include "formulads/errors.hpp"
#include "formulads/scenario.hpp"

using namespace formulads;
using nlohmann::json;

namespace {
Report run(json j) { return run_scenario(parse_config(j)); }

std::string stripped(const Report& r) {
  std::ostringstream out;
  for (const auto& rec : r.records) out << strip_timing(rec).dump() << '\n';
  out << strip_timing(r.summary).dump() << '\n';
  return out.str();
}
}  // namespace

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_config(json{{"seed", 1}, {"bogus", 2}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"n", 4}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"seed", 1}, {"n", 0}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"seed", 1}, {"p", 15}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"seed", 1}, {"engine", "fast"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"seed", 1}, {"scenario", "other"}}), ConfigError);
  auto c = parse_config(json{{"seed", 3}, {"ring", "fixed"}, {"bits", 40}, {"precision", "certified"}});
  CHECK(c.bits == 40);
  CHECK(c.certified);
}

TEST_CASE("maintain on inv(A) in the rational ring is exact") {
  Report r = run({{"scenario", "maintain"}, {"formula", "inv(A)"}, {"n", 4}, {"t", 4}, {"seed", 1}});
  CHECK(r.pass);
  CHECK(r.records.size() == 4);
  CHECK(r.summary["max_abs_err"] == 0.0);
}

TEST_CASE("zero updates give an empty passing report") {
  Report r = run({{"scenario", "maintain"}, {"t", 0}, {"seed", 1}});
  CHECK(r.pass);
  CHECK(r.records.empty());
}

TEST_CASE("matching scenario agrees with brute force") {
  Report r = run({{"scenario", "matching"}, {"n", 6}, {"t", 50}, {"seed", 7}});
  CHECK(r.pass);
  REQUIRE(r.records.size() == 50);
  for (const auto& rec : r.records) CHECK(rec["size"] == rec["oracle"]);
}

TEST_CASE("matching scenario with an explicit stream") {
  Report r = run({{"scenario", "matching"},
                  {"n", 4},
                  {"seed", 2},
                  {"ops", {"ins 0 1", "ins 1 2", "ins 2 3", "off 1", "merge 0 2", "del 0 3"}}});
  CHECK(r.pass);
  CHECK(r.records.size() == 6);
  CHECK(r.records[2]["size"] == 2);
  CHECK(r.records[3]["size"] == 1);
}

TEST_CASE("other scenarios pass") {
  CHECK(run({{"scenario", "determinant"}, {"n", 3}, {"t", 10}, {"seed", 4}}).pass);
  CHECK(run({{"scenario", "determinant"}, {"n", 3}, {"t", 10}, {"seed", 4}, {"ring", "fixed"},
             {"precision", "certified"}, {"engine", "lazy"}})
            .pass);
  CHECK(run({{"scenario", "rank"}, {"n", 5}, {"t", 30}, {"seed", 4}}).pass);
  CHECK(run({{"scenario", "maintain"}, {"ring", "float64"}, {"engine", "twolevel"}, {"seed", 9}}).pass);
}

TEST_CASE("reports are reproducible apart from timings") {
  json cfg{{"scenario", "maintain"}, {"ring", "fixed"}, {"bits", 64}, {"engine", "lazy"}, {"seed", 12}};
  CHECK(stripped(run(cfg)) == stripped(run(cfg)));
  json untimed = cfg;
  untimed["timing"] = false;
  std::ostringstream a, b;
  write_jsonl(run(untimed), a);
  write_jsonl(run(untimed), b);
  CHECK(a.str() == b.str());
}

TEST_CASE("bits sweep") {
  auto cfg = parse_config({{"scenario", "bits-sweep"}, {"seed", 5}});
  Report r = bits_sweep(cfg, {16, 24, 32});
  CHECK(r.summary["monotone"] == true);
  CHECK(r.pass);
  Report single = bits_sweep(cfg, {24});
  CHECK(single.summary["slope"].is_null());
  CHECK_THROWS_AS(bits_sweep(cfg, {32, 16}), ConfigError);
}

TEST_CASE("least-squares slope") {
  CHECK(fit_slope({1, 2, 3}, {2, 4, 6}).value() == doctest::Approx(2.0));
  CHECK_FALSE(fit_slope({1}, {1}).has_value());
}

TEST_CASE("CSV output has a header and one row per record") {
  Report r = run({{"scenario", "rank"}, {"n", 3}, {"t", 5}, {"seed", 1}});
  std::ostringstream out;
  write_csv(r, out);
  std::string s = out.str();
  CHECK(std::count(s.begin(), s.end(), '\n') == 6);
  std::string header = s.substr(0, s.find('\n'));
  CHECK(header.find("step") != std::string::npos);
  CHECK(header.find("rank") != std::string::npos);
}
