#pragma once

#include <Eigen/Dense>

namespace covsched {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Default eigenvalue slack for positive semidefiniteness checks, applied
// after symmetrization. Repeated f-compositions drift at roughly this scale.
inline constexpr double kPsdTol = -1e-8;

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Matrix& m);

// min eigenvalue of sym(m) >= tol
bool is_psd(const Matrix& m, double tol = kPsdTol);

// X <= Y in the positive semidefinite order.
inline bool psd_leq(const Matrix& x, const Matrix& y, double tol = kPsdTol) {
  return is_psd(y - x, tol);
}

// Largest eigenvalue magnitude of a (possibly nonsymmetric) square matrix.
double spectral_radius(const Matrix& a);

// Elementwise infinity norm of the difference.
inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace covsched
