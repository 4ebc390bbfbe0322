#include "covsched/model.hpp"

#include <cmath>

#include "covsched/errors.hpp"

namespace covsched {

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  return es.eigenvalues().minCoeff();
}

bool is_psd(const Matrix& m, double tol) { return min_eigenvalue(m) >= tol; }

double spectral_radius(const Matrix& a) {
  Eigen::EigenSolver<Matrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

SystemModel SystemModel::create(const Matrix& A, const Matrix& Q) {
  if (A.rows() != A.cols() || A.rows() < 1)
    throw ConfigError("model: A must be square with n >= 1");
  if (Q.rows() != A.rows() || Q.cols() != A.cols())
    throw ConfigError("model: Q must match the dimension of A");
  if (!A.allFinite() || !Q.allFinite())
    throw ConfigError("model: A and Q must have finite entries");
  if (max_abs_diff(Q, Q.transpose()) > 1e-10)
    throw ConfigError("model: Q must be symmetric within 1e-10");
  if (min_eigenvalue(Q) < -1e-10)
    throw ConfigError("model: Q must be positive semidefinite");
  return SystemModel{A, symmetrize(Q), static_cast<int>(A.rows())};
}

SensorModel SensorModel::create(const Matrix& C, const Matrix& R, double lambda,
                                double energy_cost, double feedback_lambda) {
  if (C.rows() < 1 || C.cols() < 1) throw ConfigError("sensor: C must be nonempty");
  if (R.rows() != C.rows() || R.cols() != C.rows())
    throw ConfigError("sensor: R must be square with the dimension of C's rows");
  if (max_abs_diff(R, R.transpose()) > 1e-10)
    throw ConfigError("sensor: R must be symmetric within 1e-10");
  if (min_eigenvalue(R) <= 0.0)
    throw ConfigError("sensor: R must be positive definite");
  if (lambda < 0.0 || lambda > 1.0)
    throw ConfigError("sensor: lambda must lie in [0,1]");
  if (feedback_lambda < 0.0 || feedback_lambda > 1.0)
    throw ConfigError("sensor: feedback_lambda must lie in [0,1]");
  if (energy_cost < 0.0) throw ConfigError("sensor: energy_cost must be >= 0");
  return SensorModel{C, symmetrize(R), lambda, energy_cost, feedback_lambda};
}

ChannelModel ChannelModel::iid(double lambda) {
  if (lambda < 0.0 || lambda > 1.0)
    throw ConfigError("channel: lambda must lie in [0,1]");
  return ChannelModel{Kind::Iid, 1.0 - lambda, lambda};
}

ChannelModel ChannelModel::markov(double p, double q) {
  if (p < 0.0 || p > 1.0 || q < 0.0 || q > 1.0)
    throw ConfigError("channel: p and q must lie in [0,1]");
  return ChannelModel{Kind::Markov, p, q};
}

Eigen::Matrix2d ChannelModel::transition_matrix() const {
  Eigen::Matrix2d t;
  // rows: previous bit 0/1; cols: next bit 0/1
  t << 1.0 - q, q, p, 1.0 - p;
  return t;
}

namespace {

void require_cov_shape(const Matrix& P, int n, const char* op) {
  if (P.rows() != n || P.cols() != n)
    throw ConfigError(std::string(op) + ": covariance dimension mismatch");
}

}  // namespace

Matrix f_map(const Matrix& P, const SystemModel& model) {
  require_cov_shape(P, model.n, "f_map");
  return symmetrize(model.A * P * model.A.transpose() + model.Q);
}

Matrix f_map_pow(const Matrix& P, const SystemModel& model, int n) {
  Matrix out = P;
  for (int i = 0; i < n; ++i) out = f_map(out, model);
  return out;
}

Matrix g_map(const Matrix& P, const SystemModel& model, const SensorModel& sensor) {
  require_cov_shape(P, model.n, "g_map");
  if (sensor.C.cols() != model.n) throw ConfigError("g_map: sensor dimension mismatch");
  const Matrix CP = sensor.C * P;
  const Matrix innov = CP * sensor.C.transpose() + sensor.R;
  // Solve against the innovation matrix instead of forming its inverse.
  const Matrix APC = model.A * P * sensor.C.transpose();
  const Matrix correction = APC * innov.ldlt().solve(APC.transpose());
  return symmetrize(model.A * P * model.A.transpose() - correction + model.Q);
}

double stability_bound(const SystemModel& model) {
  const double rho = spectral_radius(model.A);
  if (rho <= 1.0) return 0.0;
  return 1.0 - 1.0 / (rho * rho);
}

Matrix lyapunov_solve(const Matrix& F, const Matrix& V) {
  if (F.rows() != F.cols() || V.rows() != V.cols() || F.rows() != V.rows())
    throw ConfigError("lyapunov_solve: F and V must be square of equal size");
  const double rho = spectral_radius(F);
  if (rho >= 1.0)
    throw PreconditionError("lyapunov_solve: spectral radius " + std::to_string(rho) +
                            " >= 1, no bounded solution");
  Matrix P = symmetrize(V);
  constexpr long kCap = 1000000;
  for (long i = 0; i < kCap; ++i) {
    Matrix next = symmetrize(F * P * F.transpose() + V);
    if (max_abs_diff(next, P) < 1e-12) return next;
    P = next;
  }
  throw PreconditionError("lyapunov_solve: fixed-point iteration did not converge");
}

bool check_detectability(const SystemModel& model, const Matrix& C) {
  if (C.cols() != model.n) throw ConfigError("check_detectability: C dimension mismatch");
  Eigen::EigenSolver<Matrix> es(model.A, /*computeEigenvectors=*/false);
  const int n = model.n;
  for (int i = 0; i < n; ++i) {
    const std::complex<double> sigma = es.eigenvalues()(i);
    if (std::abs(sigma) < 1.0) continue;
    Eigen::MatrixXcd pbh(n + C.rows(), n);
    pbh.topRows(n) = sigma * Eigen::MatrixXcd::Identity(n, n) - model.A.cast<std::complex<double>>();
    pbh.bottomRows(C.rows()) = C.cast<std::complex<double>>();
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-8 * sv(0)) return false;
  }
  return true;
}

SensorModel fold_feedback(const SensorModel& sensor) {
  SensorModel out = sensor;
  out.lambda = sensor.lambda * sensor.feedback_lambda;
  out.feedback_lambda = 1.0;
  return out;
}

}  // namespace covsched
