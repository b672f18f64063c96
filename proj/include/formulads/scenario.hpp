#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "formulads/scalars.hpp"

namespace formulads {

struct ScenarioConfig {
  std::string scenario = "maintain";  // maintain | determinant | rank | matching | bits-sweep
  std::optional<std::string> formula;  // undeclared names default to n x n
  std::size_t s_max = 6;               // generator bounds when no formula is given
  std::size_t dim_max = 4;
  std::size_t n = 4;
  std::size_t t = 8;
  std::string ring = "rational";  // rational | float64 | fixed
  unsigned bits = 96;
  bool certified = false;  // certified bit policy for the fixed ring
  double eps = 1e-6;
  std::uint64_t p = kMersenne61;
  std::uint64_t seed = 1;
  std::string engine = "explicit";
  std::optional<double> mu;
  std::optional<double> nu;
  long entry_range = 3;  // random input entries in [-r, r]
  std::vector<unsigned> b_list;
  double slope_max = -0.8;
  std::vector<std::string> graph_ops;  // explicit matching update stream
  bool timing = true;
};

// Throws ConfigError on unknown keys or invalid values.
ScenarioConfig parse_config(const nlohmann::json& j);

struct Report {
  std::vector<nlohmann::json> records;
  nlohmann::json summary;
  bool pass = true;
};

Report run_scenario(const ScenarioConfig& cfg);
Report bits_sweep(const ScenarioConfig& cfg, const std::vector<unsigned>& b_list);

// JSON lines: one per record, then the summary.
void write_jsonl(const Report& r, std::ostream& out);
void write_csv(const Report& r, std::ostream& out);

// Drops timing fields so reports can be compared byte for byte.
nlohmann::json strip_timing(const nlohmann::json& j);

// Least-squares slope of ys against xs; nullopt with fewer than two points.
std::optional<double> fit_slope(const std::vector<double>& xs, const std::vector<double>& ys);

}  // namespace formulads
