#pragma once

#include <string>

#include "covsched/linalg.hpp"

namespace covsched {

/// Plant x_{k+1} = A x_k + w_k with w_k ~ N(0, Q).
struct SystemModel {
  Matrix A;
  Matrix Q;
  int n = 0;

  // Validates shapes, finiteness, symmetry of Q (1e-10) and Q >= -1e-10 I.
  static SystemModel create(const Matrix& A, const Matrix& Q);
};

/// One sensor: y_k = C x_k + v_k with v_k ~ N(0, R), reception probability
/// lambda over the shared channel, per-transmission energy cost, and the
/// reception probability of its feedback link (1 = perfect).
struct SensorModel {
  Matrix C;
  Matrix R;
  double lambda = 1.0;
  double energy_cost = 0.0;
  double feedback_lambda = 1.0;

  int obs_dim() const { return static_cast<int>(C.rows()); }

  static SensorModel create(const Matrix& C, const Matrix& R, double lambda,
                            double energy_cost, double feedback_lambda = 1.0);
};

/// Packet-drop channel. Iid(lambda) behaves exactly like Markov(1-lambda,
/// lambda); p is the failure rate P(drop | last received), q the recovery
/// rate P(received | last dropped).
struct ChannelModel {
  enum class Kind { Iid, Markov };
  Kind kind = Kind::Iid;
  double p = 0.0;  // failure rate
  double q = 1.0;  // recovery rate

  static ChannelModel iid(double lambda);
  static ChannelModel markov(double p, double q);

  // P(reception | previous reception indicator).
  double success_prob(int gamma_prev) const {
    return gamma_prev ? (1.0 - p) : q;
  }
  // 2x2 transition matrix over the reception indicator, rows = previous bit.
  Eigen::Matrix2d transition_matrix() const;
};

/// f(X) = A X A^T + Q, the one-step open-loop covariance map.
Matrix f_map(const Matrix& P, const SystemModel& model);

/// n-fold composition f^n(P).
Matrix f_map_pow(const Matrix& P, const SystemModel& model, int n);

/// g_m(X) = A X A^T - A X C^T (C X C^T + R)^{-1} C X A^T + Q, the
/// measurement-update-then-predict covariance map for one sensor.
Matrix g_map(const Matrix& P, const SystemModel& model, const SensorModel& sensor);

/// Reception-probability threshold for bounded expected covariance:
/// 1 - 1/rho(A)^2 for unstable A, 0 otherwise.
double stability_bound(const SystemModel& model);

/// Unique solution of P = F P F^T + V for rho(F) < 1, by fixed-point
/// iteration (|dP|_inf < 1e-12, cap 1e6). Throws PreconditionError carrying
/// rho(F) when rho(F) >= 1.
Matrix lyapunov_solve(const Matrix& F, const Matrix& V);

/// PBH test: every eigenvalue of A with |sigma| >= 1 must keep
/// [sigma I - A; C] at full column rank (relative singular value
/// threshold 1e-8).
bool check_detectability(const SystemModel& model, const Matrix& C);

/// Folds feedback-link losses into the forward link: lambda' = lambda *
/// feedback_lambda, feedback_lambda' = 1.
SensorModel fold_feedback(const SensorModel& sensor);

}  // namespace covsched
