#pragma once

#include <string>

#include <json.hpp>

#include "covsched/config.hpp"

namespace covsched {

struct CommandResult {
  int exit_code = 0;
  std::string message;         // human-readable summary or error
  nlohmann::json report;       // machine-readable command report
};

/// Solves the configured scheduling problem (finite, infinite, or Markov
/// drops), writing one policy/value artifact per beta plus a tradeoff CSV
/// for beta grids.
CommandResult cmd_solve(const ExperimentConfig& cfg, const std::string& out_dir);

/// Runs the Monte Carlo engine with the configured policy source and writes
/// a summary artifact (plus optional trace CSV and baseline sweep CSV).
CommandResult cmd_simulate(const ExperimentConfig& cfg, const std::string& out_dir);

/// Runs the structural invariant battery (monotone values, monotone phi,
/// psi-crossing persistence, chain ordering, threshold-form policies) plus
/// the two measurement-transmission counterexample reproductions. Nonzero
/// exit on any violation.
CommandResult cmd_verify(const ExperimentConfig& cfg, const std::string& out_dir);

/// Sweeps beta, solving each point and evaluating the closed forms (single
/// sensor) or simulating (multi-sensor).
CommandResult cmd_tradeoff(const ExperimentConfig& cfg, const std::string& out_dir);

/// Estimator comparison over randomly drawn sensor parameters: per draw,
/// the optimal, constant-gain and measurement estimators run on one shared
/// realization under uniform random scheduling.
CommandResult cmd_table1(const ExperimentConfig& cfg, const std::string& out_dir);

/// Reproduces the two canonical counterexamples of the measurement-
/// transmission case (fixed parameters, independent of the config).
CommandResult cmd_counterexamples(const ExperimentConfig& cfg,
                                  const std::string& out_dir);

/// Dispatch by command name; unknown commands yield exit code 1.
CommandResult run_command(const std::string& command, const ExperimentConfig& cfg,
                          const std::string& out_dir);

}  // namespace covsched
