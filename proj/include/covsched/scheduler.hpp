#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "covsched/state_space.hpp"

namespace covsched {

/// Time-indexed decision table: action[k-1][state] for stage k in 1..K.
struct FinitePolicy {
  int horizon = 0;
  std::vector<std::vector<int>> action;
};

/// Stationary decision table, one action per state of S^N.
struct StationaryPolicy {
  std::vector<int> action;
};

struct FiniteSolution {
  FinitePolicy policy;
  // values[k-1][state] = J_k; values[K] is the zero terminal row.
  std::vector<std::vector<double>> values;
};

/// Backward induction for the finite-horizon problem on S^N with the local
/// filters in steady state. Stage cost of transmitting m from state P~:
/// beta [lam_m tr Pbar_m + (1-lam_m) tr f(P~)] + (1-beta) E_m; of staying
/// silent: beta tr f(P~). Ties prefer no transmission, then the lowest
/// sensor index.
FiniteSolution solve_finite_horizon(const StateSpace& space, double beta, int K);

struct RviSolution {
  StationaryPolicy policy;
  std::vector<double> h;    // relative value function, h(ref) = 0
  double rho = 0.0;         // average cost per stage
  double bellman_residual = 0.0;
  long iterations = 0;
  std::vector<double> rho_history;  // last few iterates of rho
  double boundary_mass = 0.0;       // stationary mass at the truncated tail
};

/// Relative value iteration for the average-cost problem, reference state
/// (sensor 1, hop 0). Terminates when max |h_{l+1} - h_l| < epsilon.
/// Throws PreconditionError unless A is stable or some lambda_m exceeds the
/// stability bound.
RviSolution solve_infinite_horizon(const StateSpace& space, double beta,
                                   double epsilon = 1e-9, long max_iterations = 100000);

struct BruteForceResult {
  double cost = 0.0;
  FinitePolicy policy;  // -1 on unreachable (k, state) pairs
  long policies_evaluated = 0;
};

/// Exhaustive enumeration of Markov deterministic policies on the (k, state)
/// pairs reachable from `initial_state`, each evaluated exactly by forward
/// probability propagation. Refuses above `guard` policy evaluations.
BruteForceResult brute_force_policy_oracle(const StateSpace& space, double beta, int K,
                                           int initial_state, std::size_t guard = 1000000);

/// Cost of a given finite policy from `initial_state`, by the same forward
/// propagation the oracle uses.
double evaluate_finite_policy(const StateSpace& space, const FinitePolicy& policy,
                              double beta, int initial_state);

/// Exact finite-horizon DP from an arbitrary initial covariance (local
/// filters still in steady state): enumerates the reachable covariances
/// f^j(P0) and f^j(Pbar_m) explicitly, no truncation.
struct ExactFiniteSolution {
  double cost = 0.0;
  // action[k-1] maps (orbit, hops) to the optimal action; orbit 0 is the
  // P0 chain, orbit m the chain of sensor m.
  std::vector<std::vector<std::vector<int>>> action;
};
ExactFiniteSolution solve_finite_exact(const SystemModel& model,
                                       const std::vector<SensorModel>& sensors,
                                       const std::vector<SteadyStateFilter>& filters,
                                       double beta, int K, const Matrix& P0);

// ---------------------------------------------------------------------------
// Measurement transmission
// ---------------------------------------------------------------------------

struct MeasNode {
  Matrix cov;      // P_{k|k-1} at this node
  int depth = 0;   // 0-based; decision stage k = depth + 1
  int parent = -1;
  int branch = -1;           // which child of the parent: 0 = f, m = g_m
  std::vector<int> children; // size M+1 for decision nodes, empty at depth K
  int action = -1;
  double value = 0.0;        // J_{depth+1}(cov)
};

struct MeasTree {
  std::vector<MeasNode> nodes;  // nodes[0] is the root
  int horizon = 0;
};

/// Finite-horizon DP for measurement transmission: exact enumeration of the
/// covariance tree rooted at P0 under {f, g_1, ..., g_M}. Refuses trees
/// above `guard` nodes. Requires detectability of the stacked system.
MeasTree solve_finite_meas(const SystemModel& model,
                           const std::vector<SensorModel>& sensors, double beta, int K,
                           const Matrix& P0, std::size_t guard = 1000000);

struct ActionRegion {
  int action = 0;
  double lo = 0.0;
  double hi = 0.0;
};

/// Scalar one-step analysis of the measurement problem: partitions [p_lo,
/// p_hi] into optimal-action regions, locating the boundaries by bisection
/// of the stage-cost comparisons.
std::vector<ActionRegion> meas_one_step_regions(const SystemModel& model,
                                                const std::vector<SensorModel>& sensors,
                                                double beta, double p_lo, double p_hi);

// ---------------------------------------------------------------------------
// Markovian packet drops (single sensor)
// ---------------------------------------------------------------------------

/// Policies and values over S^N x {previous reception indicator}.
/// Index [gamma_prev] in 0..1.
struct MarkovSolution {
  std::vector<std::array<int, 2>> action;     // per state
  std::vector<std::array<double, 2>> h;
  double rho = 0.0;
  double bellman_residual = 0.0;
  long iterations = 0;
  std::array<int, 2> threshold{};             // first transmitting hop, -1 = never
  double lambda_eff = 0.0;  // q/(p+q), the heuristic stability guard input
};

/// Average-cost RVI on the product space. The infinite-horizon stability
/// condition is not available for Markov drops; the i.i.d. bound applied to
/// lambda_eff = q/(p+q) is used as a heuristic guard and reported as such.
MarkovSolution solve_markov_drops_infinite(const StateSpace& space,
                                           const ChannelModel& channel, double beta,
                                           double epsilon = 1e-9,
                                           long max_iterations = 100000);

struct MarkovFiniteSolution {
  // action[k-1][state][gamma_prev]
  std::vector<std::vector<std::array<int, 2>>> action;
  std::vector<std::array<int, 2>> threshold;  // per stage
};

MarkovFiniteSolution solve_markov_drops_finite(const StateSpace& space,
                                               const ChannelModel& channel, double beta,
                                               int K);

// ---------------------------------------------------------------------------
// Structure analysis
// ---------------------------------------------------------------------------

struct ThresholdBoundary {
  int action = 0;       // action of the band that starts here
  int chain_pos = 0;    // position along the sorted chain
  int state_index = 0;  // state-space index of the first state of the band
  double trace = 0.0;
};

struct ThresholdReport {
  bool applicable = false;    // false when the chain is not totally ordered
  bool threshold_form = false;
  int scenario = 0;           // Corollary-1 scenario 1..4 for two sensors
  int threshold_hops = -1;    // single sensor: hop index of the threshold, -1 = never
  std::vector<ThresholdBoundary> boundaries;
  std::string violation;
};

/// Verifies that a stationary policy is of threshold/banded type along the
/// totally ordered chain and classifies the two-sensor scalar scenarios.
ThresholdReport extract_thresholds(const std::vector<int>& actions,
                                   const StateSpace& space);

struct StructureReport {
  int violation_count = 0;
  std::vector<std::string> violations;
  std::vector<std::string> notes;
  bool top_states_transmit = true;  // greedy action at each truncated tail
};

/// Checks, along every comparable pair of states, that the value functions
/// are monotone, that each phi_m is monotone, and that psi crossings
/// persist (slack 1e-9). `values` holds J_1..J_K plus the zero terminal row
/// for the finite horizon, or the single relative value function h with
/// `infinite_horizon` set.
StructureReport verify_structure(const std::vector<std::vector<double>>& values,
                                 bool infinite_horizon, const StateSpace& space,
                                 double beta);

}  // namespace covsched
