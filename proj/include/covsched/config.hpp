#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "covsched/model.hpp"
#include "covsched/sim.hpp"

namespace covsched {

/// Parsed and validated experiment document. `echo` carries the config with
/// every default materialized; it is embedded verbatim in all artifacts.
struct ExperimentConfig {
  nlohmann::json echo;

  SystemModel model;
  std::vector<SensorModel> sensors;
  ChannelModel channel;

  // solver
  std::string horizon = "infinite";
  int K = 5;
  std::vector<double> betas;
  bool beta_grid = false;
  int N = 20;
  double epsilon = 1e-9;
  long max_iterations = 100000;

  // simulation
  long steps = 10000;
  int replications = 1;
  SimSeeds seeds;
  bool run_optimal = false;
  bool run_suboptimal = true;
  bool run_measurement = false;
  std::string policy_kind = "never";
  std::string policy_file;
  int policy_t = 0;
  std::vector<double> baseline_thresholds;
  std::vector<double> baseline_grid;
  double burn_in_fraction = 0.01;
  bool trace_csv = false;
  int initial_sensor = 0;  // 0-based
  int initial_hops = 1;
  CrossInit cross_init = CrossInit::Q;
  std::optional<Matrix> x0_cov;

  // table1 protocol
  int table1_draws = 20;
  long table1_steps = 100000;
  std::uint64_t table1_seed = 1;

  std::string output_prefix = "run";
};

/// Parses a raw document, rejecting unknown keys and materializing all
/// defaults. `seed_override`, when given, replaces every seed field.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc,
                                         std::optional<std::uint64_t> seed_override = {});

/// Reads and parses a config file; syntax errors surface as ConfigError
/// with the parser's position diagnostics.
nlohmann::json load_json_file(const std::string& path);

Matrix matrix_from_json(const nlohmann::json& value, const std::string& path);
nlohmann::json matrix_to_json(const Matrix& m);

}  // namespace covsched
