#include "covsched/remote.hpp"

#include "covsched/errors.hpp"

namespace covsched {

namespace {

Matrix ikc_of(const LocalFilterState& local, const SensorModel& sensor, int n) {
  return Matrix::Identity(n, n) - local.gain * sensor.C;
}

}  // namespace

OptimalRemoteState optimal_init(const SystemModel& model,
                                const std::vector<SensorModel>& sensors,
                                const std::vector<LocalFilterState>& locals,
                                const Matrix& prior_cov, CrossInit cross_init) {
  const int M = static_cast<int>(sensors.size());
  OptimalRemoteState s;
  s.estimate = Vector::Zero(model.n);
  s.estimate_post = s.estimate;
  s.prior_cov = symmetrize(prior_cov);
  s.post_cov = s.prior_cov;
  s.gain = Matrix::Zero(model.n, model.n);
  s.cross_cov.resize(M);
  s.pair_cov.assign(M, std::vector<Matrix>(M));
  for (int m = 0; m < M; ++m) {
    // CrossInit::SteadyState targets P_{0m} only; the P_{mn} off-diagonals
    // stay at Q so that P_{mn} = P_{nm}^T holds from the start.
    s.cross_cov[m] = cross_init == CrossInit::Q ? model.Q : locals[m].prior_cov;
    for (int n = 0; n < M; ++n)
      s.pair_cov[m][n] = m == n ? locals[m].prior_cov  // P_{mm} is the local prior
                                : model.Q;
  }
  return s;
}

OptimalRemoteState optimal_step(const OptimalRemoteState& state, int scheduled,
                                int gamma, const std::optional<Vector>& received_estimate,
                                const std::vector<LocalFilterState>& locals,
                                const SystemModel& model,
                                const std::vector<SensorModel>& sensors) {
  const int M = static_cast<int>(sensors.size());
  const int n = model.n;
  if (scheduled < 0 || scheduled > M)
    throw ConfigError("optimal_step: scheduled sensor out of range");
  const bool received = scheduled != kNoTransmit && gamma == 1;
  if (received != received_estimate.has_value())
    throw ConfigError("optimal_step: received_estimate must be present iff gamma = 1");

  const Matrix I = Matrix::Identity(n, n);
  // ikc[m] = I - K^s_m C_m at time k, from the local filter step already applied.
  std::vector<Matrix> ikc(M);
  for (int m = 0; m < M; ++m) ikc[m] = ikc_of(locals[m], sensors[m], n);

  OptimalRemoteState next;
  next.cross_cov.resize(M);
  next.pair_cov.assign(M, std::vector<Matrix>(M));

  Matrix gain = Matrix::Zero(n, n);
  Matrix post;
  Vector est_post;

  if (scheduled == kNoTransmit || gamma == 0) {
    post = state.prior_cov;
    est_post = state.estimate;
    // P_{0m,k+1} = A P_{0m}(I - K^s_m C_m)^T A^T + Q
    for (int m = 0; m < M; ++m)
      next.cross_cov[m] =
          model.A * state.cross_cov[m] * ikc[m].transpose() * model.A.transpose() + model.Q;
  } else {
    const int mb = scheduled - 1;
    const LocalFilterState& lb = locals[mb];
    const Matrix& P = state.prior_cov;
    const Matrix& P0 = state.cross_cov[mb];
    // The Joseph identity (I-K^s C) P^s_{k|k-1} (I-K^s C)^T + K^s R K^s^T =
    // P^s_{k|k} lets every occurrence of the local prior at time k be read
    // off the stepped local state.
    const Matrix& local_post = lb.post_cov;
    // Numerator and denominator of the two-case gain formula.
    const Matrix num = P - P0 * ikc[mb].transpose();
    const Matrix den = num - ikc[mb] * P0.transpose() + local_post;
    // The paper's exact-equality switch, tested at relative Frobenius 1e-9.
    if ((den - num).norm() <= 1e-9 * (1.0 + num.norm())) {
      gain = I;
    } else {
      Eigen::FullPivLU<Matrix> lu(den.transpose());
      if (!lu.isInvertible())
        throw PreconditionError("optimal_step: degenerate gain denominator");
      gain = lu.solve(num.transpose()).transpose();
    }
    const Matrix ik = I - gain;
    post = symmetrize(ik * P * ik.transpose() + ik * P0 * ikc[mb].transpose() * gain.transpose() +
                      gain * ikc[mb] * P0.transpose() * ik.transpose() +
                      gain * local_post * gain.transpose());
    est_post = state.estimate + gain * (*received_estimate - state.estimate);

    // P_{0m',k+1}: scheduled sensor vs the others.
    next.cross_cov[mb] = model.A * ik * P0 * ikc[mb].transpose() * model.A.transpose() +
                         model.A * gain * local_post * model.A.transpose() + model.Q;
    for (int m = 0; m < M; ++m) {
      if (m == mb) continue;
      next.cross_cov[m] =
          model.A * ik * state.cross_cov[m] * ikc[m].transpose() * model.A.transpose() +
          model.A * gain * ikc[mb] * state.pair_cov[mb][m] * ikc[m].transpose() *
              model.A.transpose() +
          model.Q;
    }
  }

  // P_{mn,k+1} = A (I-K^s_m C_m) P_{mn} (I-K^s_n C_n)^T A^T + Q, plus the
  // K^s R K^s^T term on the diagonal so P_{mm} tracks the local prior.
  for (int m = 0; m < M; ++m) {
    for (int nn = 0; nn < M; ++nn) {
      Matrix block =
          model.A * ikc[m] * state.pair_cov[m][nn] * ikc[nn].transpose() * model.A.transpose() +
          model.Q;
      if (m == nn)
        block += model.A * locals[m].gain * sensors[m].R * locals[m].gain.transpose() *
                 model.A.transpose();
      next.pair_cov[m][nn] = block;
    }
  }

  next.gain = gain;
  next.post_cov = post;
  next.estimate_post = est_post;
  next.prior_cov = f_map(post, model);
  next.estimate = model.A * est_post;
  return next;
}

ConstantGainFixedPoint verify_constant_gain_fixed_point(const SystemModel& model,
                                                        const SensorModel& sensor) {
  const double bound = stability_bound(model);
  if (sensor.lambda <= bound)
    throw PreconditionError(
        "constant-gain fixed point: lambda = " + std::to_string(sensor.lambda) +
        " does not exceed the stability bound " + std::to_string(bound));

  const SteadyStateFilter ss = dare_steady_state(model, sensor);
  const int n = model.n;
  const Matrix I = Matrix::Identity(n, n);
  const Matrix ikc = I - ss.gain * sensor.C;
  const Matrix krk = ss.gain * sensor.R * ss.gain.transpose();
  const double lam = sensor.lambda;

  // P solves P = (1-lam) A P A^T + Q + lam A (I-K^s C) Pbar^s (I-K^s C)^T A^T
  //              + lam A K^s R K^s^T A^T
  const Matrix F = std::sqrt(1.0 - lam) * model.A;
  const Matrix V = model.Q +
                   lam * model.A * (ikc * ss.prior_cov * ikc.transpose() + krk) *
                       model.A.transpose();
  const Matrix P = lyapunov_solve(F, V);
  const Matrix P0 = ss.prior_cov;
  const Matrix K = I;

  ConstantGainFixedPoint out{P, P0, K, {0, 0, 0}};

  // Residual of the covariance equation with K = I (so the (I-K) terms drop).
  const Matrix rhs1 = (1.0 - lam) * model.A * P * model.A.transpose() + V;
  out.residuals[0] = max_abs_diff(P, rhs1);

  // Residual of the cross-covariance equation at P0m = Pbar^s.
  const Matrix rhs2 = (1.0 - lam) * model.A * P0 * ikc.transpose() * model.A.transpose() +
                      lam * model.A * ikc * ss.prior_cov * ikc.transpose() * model.A.transpose() +
                      model.Q + lam * model.A * krk * model.A.transpose();
  out.residuals[1] = max_abs_diff(P0, rhs2);

  // Gain equation: numerator equals denominator, i.e. K = I exactly.
  const Matrix num = P - P0 * ikc.transpose();
  const Matrix den = num - ikc * P0.transpose() + ikc * ss.prior_cov * ikc.transpose() + krk;
  out.residuals[2] = max_abs_diff(num, den);
  return out;
}

ConstantGainState suboptimal_init(const SystemModel& model, const Vector& estimate,
                                  const CovState& cov) {
  if (estimate.size() != model.n || cov.matrix.rows() != model.n)
    throw ConfigError("suboptimal_init: dimension mismatch");
  return ConstantGainState{estimate, cov};
}

ConstantGainState suboptimal_step(const ConstantGainState& state, int scheduled,
                                  int gamma,
                                  const std::optional<std::pair<Vector, CovState>>& received,
                                  const SystemModel& model) {
  const bool success = scheduled != kNoTransmit && gamma == 1;
  if (success != received.has_value())
    throw ConfigError("suboptimal_step: received payload must be present iff gamma = 1");
  if (success) {
    return ConstantGainState{received->first, received->second};
  }
  ConstantGainState next;
  next.estimate = model.A * state.estimate;
  next.cov = CovState{state.cov.sensor, state.cov.hops + 1,
                      f_map(state.cov.matrix, model), 0.0};
  next.cov.trace = next.cov.matrix.trace();
  return next;
}

MeasRemoteState meas_step(const MeasRemoteState& state, int scheduled, int gamma,
                          const std::optional<Vector>& measurement,
                          const SystemModel& model,
                          const std::vector<SensorModel>& sensors) {
  const bool success = scheduled != kNoTransmit && gamma == 1;
  if (success != measurement.has_value())
    throw ConfigError("meas_step: measurement must be present iff gamma = 1");
  MeasRemoteState next;
  if (!success) {
    next.estimate = model.A * state.estimate;
    next.cov = f_map(state.cov, model);
    return next;
  }
  const SensorModel& s = sensors[scheduled - 1];
  const Matrix innov = s.C * state.cov * s.C.transpose() + s.R;
  const Matrix gain = innov.ldlt().solve(s.C * state.cov).transpose();
  next.estimate = model.A * state.estimate +
                  model.A * gain * (*measurement - s.C * state.estimate);
  next.cov = g_map(state.cov, model, s);
  return next;
}

}  // namespace covsched
