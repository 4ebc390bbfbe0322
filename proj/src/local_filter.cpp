#include "covsched/local_filter.hpp"

#include <cmath>

#include "covsched/errors.hpp"

namespace covsched {

namespace {

// Measurement update in Joseph form, then predict. Returns (post, gain, next prior).
struct CovStep {
  Matrix post;
  Matrix gain;
  Matrix next_prior;
};

CovStep covariance_step(const Matrix& prior, const SystemModel& model,
                        const SensorModel& sensor) {
  const Matrix innov = sensor.C * prior * sensor.C.transpose() + sensor.R;
  const Matrix gain = innov.ldlt().solve(sensor.C * prior).transpose();
  const Matrix ikc = Matrix::Identity(model.n, model.n) - gain * sensor.C;
  const Matrix post =
      symmetrize(ikc * prior * ikc.transpose() + gain * sensor.R * gain.transpose());
  return {post, gain, f_map(post, model)};
}

}  // namespace

LocalFilterState kf_init(const SystemModel& model, const SensorModel& sensor,
                         const Matrix& prior_cov, const Vector& estimate_prior) {
  if (prior_cov.rows() != model.n || prior_cov.cols() != model.n ||
      estimate_prior.size() != model.n)
    throw ConfigError("kf_init: dimension mismatch");
  LocalFilterState s;
  s.estimate_prior = estimate_prior;
  s.estimate_post = estimate_prior;
  s.prior_cov = symmetrize(prior_cov);
  s.post_cov = s.prior_cov;
  s.gain = Matrix::Zero(model.n, sensor.obs_dim());
  (void)sensor;
  return s;
}

LocalFilterState kf_step(const LocalFilterState& state, const Vector& measurement,
                         const SystemModel& model, const SensorModel& sensor) {
  if (measurement.size() != sensor.obs_dim())
    throw ConfigError("kf_step: measurement dimension mismatch");
  if (state.prior_cov.rows() != model.n)
    throw ConfigError("kf_step: state dimension mismatch");
  const CovStep cov = covariance_step(state.prior_cov, model, sensor);
  LocalFilterState next;
  next.gain = cov.gain;
  next.post_cov = cov.post;
  next.prior_cov = cov.next_prior;
  next.estimate_post =
      state.estimate_prior + cov.gain * (measurement - sensor.C * state.estimate_prior);
  next.estimate_prior = model.A * next.estimate_post;
  return next;
}

SteadyStateFilter dare_steady_state(const SystemModel& model, const SensorModel& sensor) {
  constexpr long kCap = 1000000;
  Matrix prior = model.Q;
  double last_delta = 0.0;
  for (long i = 0; i < kCap; ++i) {
    const CovStep cov = covariance_step(prior, model, sensor);
    last_delta = max_abs_diff(cov.next_prior, prior);
    if (last_delta < 1e-12) {
      const CovStep fixed = covariance_step(cov.next_prior, model, sensor);
      return SteadyStateFilter{cov.next_prior, fixed.post, fixed.gain};
    }
    if (!cov.next_prior.allFinite() || cov.next_prior.norm() > 1e30)
      throw PreconditionError(
          "dare_steady_state: Riccati iteration diverged after " + std::to_string(i) +
          " steps; the pair (A, C) is likely not detectable");
    prior = cov.next_prior;
  }
  throw PreconditionError(
      "dare_steady_state: no convergence after iteration cap, last |dP|_inf = " +
      std::to_string(last_delta));
}

}  // namespace covsched
