#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "covsched/remote.hpp"
#include "covsched/rng.hpp"
#include "covsched/scheduler.hpp"
#include "covsched/state_space.hpp"

namespace covsched {

enum class PolicyKind {
  Solved,     // stationary policy over S^N, looked up by (origin, hops)
  Threshold,  // single sensor, transmit from hop t upward
  Baseline,   // sensor-side estimate-difference rule with round-robin slots
  Always,     // transmit every step (round robin across sensors for M > 1)
  Never,
  Random,     // one uniformly chosen sensor per step
  All,        // every sensor transmits every step (collision stress policy)
};

enum class EstimatorKind { Optimal = 0, Suboptimal = 1, Measurement = 2 };

struct SimSeeds {
  std::uint64_t plant = 1;
  std::uint64_t measurement = 1;
  std::uint64_t channel = 1;
};

struct SimConfig {
  PolicyKind policy_kind = PolicyKind::Never;
  std::vector<int> policy_actions;         // Solved: action per state index
  int threshold_hops = 0;                  // Threshold
  std::vector<double> baseline_thresholds; // Baseline: T_m per sensor

  long steps = 10000;
  int replications = 1;
  SimSeeds seeds;
  double burn_in_fraction = 0.01;

  bool run_optimal = false;
  bool run_suboptimal = true;
  bool run_measurement = false;

  // Initial conditions: the remote covariance starts at the state-space
  // element (initial_sensor, initial_hops); the plant state is drawn from
  // N(0, that matrix) unless x0_cov overrides it.
  int initial_sensor = 0;  // 0-based
  int initial_hops = 1;
  CrossInit cross_init = CrossInit::Q;
  std::optional<Matrix> x0_cov;

  // Optional per-step sink: (step, state index, action, gamma, trace of the
  // suboptimal covariance). Used for CSV trace logging.
  std::function<void(long, int, int, int, double)> trace_sink;
};

struct EstimatorStats {
  double avg_cov_trace = 0.0;
  double se_cov_trace = 0.0;   // batch-means standard error
  double avg_sq_error = 0.0;   // empirical squared estimation error
};

struct SimResult {
  double avg_energy = 0.0;
  double se_energy = 0.0;
  long collisions = 0;
  long boundary_visits = 0;  // policy lookups clamped at hops >= N
  long steps_used = 0;       // averaged steps after burn-in, all replications
  // Indexed by EstimatorKind; inactive estimators keep zeroed stats.
  EstimatorStats estimator[3];
  // Occupancy of the suboptimal covariance state, by hop count of its chain
  // (single sensor), for comparison against the analytic distribution.
  std::vector<double> hop_occupancy;
};

/// Steps the plant, the local filters, the shared channel with collisions
/// and feedback losses, and every requested estimator on one common
/// realization. Deterministic in the seeds. For i.i.d. channels each
/// sensor's own lambda governs its drops; a Markov channel shares (p, q)
/// across sensors with per-sensor reception memory.
SimResult run_simulation(const StateSpace& space, const ChannelModel& channel,
                         const SimConfig& config);

/// One channel draw: returns the reception indicator and advances the
/// channel memory (the previous reception indicator; no transmission
/// leaves a 0 behind).
int channel_step(const ChannelModel& channel, int& gamma_prev, RngStream& rng);

}  // namespace covsched
