#pragma once

#include <vector>

#include "covsched/local_filter.hpp"
#include "covsched/model.hpp"

namespace covsched {

/// Stationary behaviour of the Markov chain induced by a single-sensor
/// threshold policy that transmits from hop t upward: pi_j = pi_0 for
/// j <= t and pi_j = (1-lambda)^{j-t} pi_0 beyond, pi_0 = lambda/(lambda t + 1).
struct ThresholdChainResult {
  int t = 0;
  std::vector<double> pi;       // probabilities for hops 0..(pi.size()-1)
  double tail_mass = 0.0;       // analytic mass beyond the stored prefix
  double expected_energy = 0.0;
  double expected_cov_trace = 0.0;
  int truncation_index = 0;     // last hop summed into the covariance series
};

/// Stationary probabilities, stored up to `count` hops with the analytic
/// remainder in tail_mass. lambda = 1 collapses the tail; lambda = 0 is
/// rejected (the chain has no recurrence).
ThresholdChainResult stationary_distribution(int t, double lambda, int count = 64);

/// E / (lambda t + 1), the stationary energy rate of the threshold policy.
double expected_energy(int t, double lambda, double energy_cost);

struct CovSeriesResult {
  double value = 0.0;
  int truncation_index = 0;
};

/// Sum of pi_j tr f^j(Pbar), truncated once a geometric envelope on the
/// remainder (growth rate max(rho(A)^2, observed trace ratio)) drops below
/// tail_tol relative to the partial sum. Requires lambda above the
/// stability bound.
CovSeriesResult expected_covariance(int t, double lambda, const SystemModel& model,
                                    const SteadyStateFilter& filter,
                                    double tail_tol = 1e-8);

struct TradeoffPoint {
  double beta = 0.0;
  int t = 0;
  double rho = 0.0;
  double energy = 0.0;
  double cov_trace = 0.0;
};

/// Solves the infinite-horizon problem for each beta and evaluates the
/// closed forms at the resulting threshold (single sensor only).
std::vector<TradeoffPoint> tradeoff_curve(const SystemModel& model,
                                          const SensorModel& sensor,
                                          const std::vector<double>& beta_grid, int N,
                                          double epsilon = 1e-9);

}  // namespace covsched
