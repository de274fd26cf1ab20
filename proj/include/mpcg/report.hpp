#pragma once

#include "mpcg/dataset.hpp"
#include "mpcg/separator.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <string_view>

namespace mpcg {

/// Every knob of one experiment. The defaults below are the only defaults;
/// to_json echoes all of them into the report.
struct ExperimentConfig {
  std::string name = "experiment";
  std::string pipeline = "grid-cc";  // grid-cc | grid-msf | separator | emst | dbscan

  std::string input;                 // empty: generate from `gen`
  std::string input_kind = "points"; // points | graph
  GenerateParams gen;

  std::size_t s = 1024;
  double alpha = 0.0;  // > 0 sets s = round(n^alpha)
  double budget = 8.0;
  std::uint64_t seed = 1;  // drives both the generator and the cluster
  std::size_t machines = 0;

  Coord c = 1;
  std::string rule = "linf_threshold";
  double rule_param = 0.0;
  CeilingMode ceiling = CeilingMode::relaxed;

  double rho = 0.5;
  Coord c_growth = 0;  // emst: 0 picks it from (d, s, rho)
  double eps = 1.0;
  std::size_t min_pts = 3;
  bool single_label = false;

  std::size_t oracle_cap = 5000;
  bool emit_output = false;  // full labels / edges / points in the report

  static ExperimentConfig parse(std::string_view text);
  static ExperimentConfig load(const std::string& path);
  nlohmann::ordered_json to_json() const;
};

struct ExperimentOutcome {
  nlohmann::ordered_json report;
  std::string rounds_csv;
  bool all_pass = false;
};

/// Runs the pipeline under the simulator and attaches oracle verdicts.
/// Library errors are caught and reported with their stage and round;
/// ConfigError from the config itself propagates.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg);

/// Writes <root>/<name>/<seed>/report.json and rounds.csv, plus timing.json
/// when `wall_seconds` >= 0. Returns the directory.
std::filesystem::path write_outcome(const ExperimentOutcome& out, const ExperimentConfig& cfg,
                                    const std::filesystem::path& root, double wall_seconds = -1.0);

/// One CSV row per round: index, phase, max sent/received words, peak store,
/// violation flag.
std::string rounds_csv(const std::vector<RoundStats>& stats);

}  // namespace mpcg
