#pragma once

#include "covsched/model.hpp"

namespace covsched {

/// Snapshot of one sensor's local Kalman filter. After a step, post_cov,
/// gain and estimate_post refer to time k while prior_cov and
/// estimate_prior already hold the time-(k+1) prediction.
struct LocalFilterState {
  Vector estimate_prior;
  Vector estimate_post;
  Matrix prior_cov;
  Matrix post_cov;
  Matrix gain;
};

/// Steady-state local filter quantities: prior_cov is the Riccati fixed
/// point, post_cov the corresponding posterior, gain the steady Kalman gain.
struct SteadyStateFilter {
  Matrix prior_cov;
  Matrix post_cov;
  Matrix gain;
};

LocalFilterState kf_init(const SystemModel& model, const SensorModel& sensor,
                         const Matrix& prior_cov, const Vector& estimate_prior);

/// One measurement update followed by the time update. The covariance part
/// never depends on the measurement values.
LocalFilterState kf_step(const LocalFilterState& state, const Vector& measurement,
                         const SystemModel& model, const SensorModel& sensor);

/// Riccati fixed point by direct iteration from Q (|dP|_inf < 1e-12,
/// cap 1e6). Throws PreconditionError with a diagnostic when the pair is
/// not detectable and the iteration diverges or stalls.
SteadyStateFilter dare_steady_state(const SystemModel& model, const SensorModel& sensor);

}  // namespace covsched
