#pragma once

#include <optional>
#include <vector>

#include "covsched/local_filter.hpp"
#include "covsched/state_space.hpp"

namespace covsched {

/// Full state of the optimal remote estimator: remote estimate and
/// covariance plus the cross terms against every local filter.
/// cross_cov[m] = P_{0m}, pair_cov[m][n] = P_{mn} (locals, 0-based; the full
/// table is stored including the symmetric redundancy).
struct OptimalRemoteState {
  Vector estimate;       // x_{k|k-1}
  Vector estimate_post;  // x_{k|k} after the last step
  Matrix prior_cov;      // P_{k|k-1}
  Matrix post_cov;       // P_{k|k} after the last step
  std::vector<Matrix> cross_cov;
  std::vector<std::vector<Matrix>> pair_cov;
  Matrix gain;  // gain used in the last update (zero rows/cols if none)
};

/// Cross/pair covariance initialization. The paper leaves the initial
/// P_{0m} and P_{mn} unspecified; Q is the default, SteadyState sets
/// P_{0m} = P_{mn} = Pbar^s (which makes the M=1 case reproduce the
/// constant-gain estimator exactly from step one).
enum class CrossInit { Q, SteadyState };

OptimalRemoteState optimal_init(const SystemModel& model,
                                const std::vector<SensorModel>& sensors,
                                const std::vector<LocalFilterState>& locals,
                                const Matrix& prior_cov, CrossInit cross_init);

/// One step of the optimal estimator. `scheduled` is 0 for no transmission
/// or the 1-based sensor index; `gamma` is the reception indicator (ignored
/// when nothing is scheduled); `received_estimate` must be the scheduled
/// sensor's posterior estimate exactly when gamma = 1. `locals` must already
/// have been stepped through time k, i.e. carry the gain and posterior of
/// the update at k.
OptimalRemoteState optimal_step(const OptimalRemoteState& state, int scheduled,
                                int gamma, const std::optional<Vector>& received_estimate,
                                const std::vector<LocalFilterState>& locals,
                                const SystemModel& model,
                                const std::vector<SensorModel>& sensors);

/// Theorem-1 verification record for one sensor: the constant-gain fixed
/// point has K = I, P_0m = Pbar^s, and P solving the associated Lyapunov
/// equation. residuals holds the defect of each of the three fixed-point
/// equations under that substitution.
struct ConstantGainFixedPoint {
  Matrix P;
  Matrix P0m;
  Matrix K;
  double residuals[3];
};

ConstantGainFixedPoint verify_constant_gain_fixed_point(const SystemModel& model,
                                                        const SensorModel& sensor);

/// State of the constant-gain (suboptimal) estimator. The covariance is
/// always an element of S, tagged by its origin sensor and hop count; hops
/// are not clamped here (clamping is a solver artifact).
struct ConstantGainState {
  Vector estimate;  // x~_{k|k}
  CovState cov;     // P~_{k|k} = f^hops(P_{origin})
};

ConstantGainState suboptimal_init(const SystemModel& model, const Vector& estimate,
                                  const CovState& cov);

ConstantGainState suboptimal_step(const ConstantGainState& state, int scheduled,
                                  int gamma,
                                  const std::optional<std::pair<Vector, CovState>>& received,
                                  const SystemModel& model);

/// State of the remote estimator when raw measurements are transmitted.
struct MeasRemoteState {
  Vector estimate;  // x_{k+1|k}
  Matrix cov;       // P_{k+1|k}
};

/// One step: on a successful reception from sensor m the covariance follows
/// g_m, otherwise f. `measurement` must be present exactly when gamma = 1.
MeasRemoteState meas_step(const MeasRemoteState& state, int scheduled, int gamma,
                          const std::optional<Vector>& measurement,
                          const SystemModel& model,
                          const std::vector<SensorModel>& sensors);

}  // namespace covsched
