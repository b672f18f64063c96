// Experiment harness: runs one scenario against the exact oracles and emits
// JSON-lines records plus a summary. Exit 0 on pass, 1 on a failed check, 2 on error.
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "formulads/errors.hpp"
#include "formulads/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"formulads: dynamic matrix formula maintenance experiments"};
  std::string scenario, config_path, out_path, csv_path;
  std::optional<std::uint64_t> seed;
  bool as_json = false, no_timing = false;
  app.add_option("scenario", scenario, "maintain | determinant | rank | matching | bits-sweep")->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out", out_path, "write JSON lines to this file");
  app.add_option("--csv", csv_path, "write the records as a CSV table");
  app.add_flag("--json", as_json, "print JSON lines to stdout");
  app.add_flag("--no-timing", no_timing, "omit wall-clock fields");
  CLI11_PARSE(app, argc, argv);

  using nlohmann::json;
  try {
    std::ifstream in(config_path);
    if (!in) throw formulads::ConfigError("cannot open config '" + config_path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw formulads::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (j.contains("scenario") && j["scenario"] != scenario)
      throw formulads::ConfigError("config scenario '" + j["scenario"].get<std::string>() +
                                   "' disagrees with the command line");
    j["scenario"] = scenario;
    if (seed) j["seed"] = *seed;
    if (no_timing) j["timing"] = false;
    formulads::ScenarioConfig cfg = formulads::parse_config(j);
    formulads::Report rep = formulads::run_scenario(cfg);

    if (!out_path.empty()) {
      std::ofstream out(out_path);
      if (!out) throw formulads::ConfigError("cannot write '" + out_path + "'");
      formulads::write_jsonl(rep, out);
    }
    if (!csv_path.empty()) {
      std::ofstream out(csv_path);
      if (!out) throw formulads::ConfigError("cannot write '" + csv_path + "'");
      formulads::write_csv(rep, out);
    }
    if (as_json) {
      formulads::write_jsonl(rep, std::cout);
    } else {
      std::cout << scenario << ": " << (rep.pass ? "PASS" : "FAIL") << "  " << rep.summary.dump() << '\n';
    }
    return rep.pass ? 0 : 1;
  } catch (const std::exception& e) {
    json err{{"type", "error"}, {"message", e.what()}};
    std::cerr << err.dump() << '\n';
    return 2;
  }
}
