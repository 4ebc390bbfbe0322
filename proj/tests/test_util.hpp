#pragma once

#include <doctest.h>

#include "covsched/linalg.hpp"
#include "covsched/model.hpp"
#include "covsched/rng.hpp"

namespace covsched::testutil {

inline Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

inline Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// The two-sensor vector plant shared by several studies: A = [[1.1, 0.2],
// [0.2, 0.8]], Q = I. Eigenvalues {1.2, 0.7}, stability bound 1 - 1/1.44.
inline SystemModel study_model() {
  return SystemModel::create(mat2(1.1, 0.2, 0.2, 0.8), Matrix::Identity(2, 2));
}

inline SensorModel study_sensor(double lambda = 0.8, double energy = 1.0) {
  Matrix C(1, 2);
  C << 1.0, 1.0;
  return SensorModel::create(C, Matrix::Identity(1, 1), lambda, energy);
}

// Random PSD matrix Z Z^T with entries from the given stream.
inline Matrix random_psd(int n, RngStream& rng, double scale = 1.0) {
  Matrix z(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) z(i, j) = scale * rng.gaussian();
  return z * z.transpose();
}

}  // namespace covsched::testutil
