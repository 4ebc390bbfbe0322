#include "covsched/analysis.hpp"

#include <cmath>
#include <limits>

#include "covsched/errors.hpp"
#include "covsched/scheduler.hpp"
#include "covsched/state_space.hpp"

namespace covsched {

ThresholdChainResult stationary_distribution(int t, double lambda, int count) {
  if (t < 0) throw ConfigError("stationary_distribution: t must be >= 0");
  if (lambda <= 0.0 || lambda > 1.0)
    throw ConfigError("stationary_distribution: lambda must lie in (0,1]");
  ThresholdChainResult res;
  res.t = t;
  const double pi0 = lambda / (lambda * t + 1.0);
  res.pi.reserve(count);
  for (int j = 0; j < count; ++j)
    res.pi.push_back(j <= t ? pi0 : std::pow(1.0 - lambda, j - t) * pi0);
  // Geometric remainder beyond the stored prefix, exact by the series sum.
  if (count <= t) {
    res.tail_mass = (t + 1 - count) * pi0 + pi0 * (1.0 - lambda) / lambda;
  } else {
    res.tail_mass = lambda > 0.0 && lambda < 1.0
                        ? pi0 * std::pow(1.0 - lambda, count - t) / lambda
                        : 0.0;
  }
  return res;
}

double expected_energy(int t, double lambda, double energy_cost) {
  if (t < 0) throw ConfigError("expected_energy: t must be >= 0");
  if (lambda <= 0.0 || lambda > 1.0)
    throw ConfigError("expected_energy: lambda must lie in (0,1]");
  return energy_cost / (lambda * t + 1.0);
}

CovSeriesResult expected_covariance(int t, double lambda, const SystemModel& model,
                                    const SteadyStateFilter& filter, double tail_tol) {
  if (lambda <= stability_bound(model) || lambda <= 0.0)
    throw PreconditionError(
        "expected_covariance: lambda must exceed the stability bound for the series "
        "to converge");
  const double pi0 = lambda / (lambda * t + 1.0);
  const double rho2 = std::pow(spectral_radius(model.A), 2);

  Matrix P = filter.post_cov;
  double sum = 0.0;
  double prev_trace = P.trace();
  int j = 0;
  constexpr int kCap = 100000;
  for (; j < kCap; ++j) {
    const double trace = P.trace();
    const double pij = j <= t ? pi0 : std::pow(1.0 - lambda, j - t) * pi0;
    sum += pij * trace;
    if (j > t) {
      // Envelope on the remainder: traces grow at most like
      // max(rho(A)^2, the currently observed ratio) per hop.
      const double ratio = prev_trace > 0.0 ? trace / prev_trace : rho2;
      const double growth = (1.0 - lambda) * std::max(rho2, ratio);
      if (growth < 1.0) {
        const double remainder = pij * trace * growth / (1.0 - growth);
        if (remainder <= tail_tol * sum) break;
      }
    }
    prev_trace = trace;
    P = f_map(P, model);
  }
  return CovSeriesResult{sum, j};
}

std::vector<TradeoffPoint> tradeoff_curve(const SystemModel& model,
                                          const SensorModel& sensor,
                                          const std::vector<double>& beta_grid, int N,
                                          double epsilon) {
  const StateSpace space = build_state_space(model, {sensor}, N);
  std::vector<TradeoffPoint> curve;
  curve.reserve(beta_grid.size());
  for (double beta : beta_grid) {
    const RviSolution sol = solve_infinite_horizon(space, beta, epsilon);
    const ThresholdReport th = extract_thresholds(sol.policy.action, space);
    if (!th.threshold_form)
      throw PreconditionError("tradeoff_curve: solved policy is not of threshold form");
    TradeoffPoint pt;
    pt.beta = beta;
    pt.rho = sol.rho;
    if (th.threshold_hops < 0) {
      // Never transmits; only meaningful for stable A.
      pt.t = -1;
      pt.energy = 0.0;
      pt.cov_trace = std::numeric_limits<double>::quiet_NaN();
    } else {
      pt.t = th.threshold_hops;
      pt.energy = expected_energy(pt.t, sensor.lambda, sensor.energy_cost);
      pt.cov_trace =
          expected_covariance(pt.t, sensor.lambda, model, space.filters()[0]).value;
    }
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace covsched
