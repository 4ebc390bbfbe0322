#include "covsched/local_filter.hpp"

#include <doctest.h>

#include "covsched/errors.hpp"
#include "test_util.hpp"

using namespace covsched;
using namespace covsched::testutil;

namespace {

// Independent Riccati iteration used as the steady-state oracle.
Matrix riccati_oracle(const SystemModel& m, const SensorModel& s, int iters) {
  Matrix P = m.Q;
  for (int i = 0; i < iters; ++i) {
    const Matrix S = s.C * P * s.C.transpose() + s.R;
    const Matrix K = P * s.C.transpose() * S.inverse();
    P = m.A * (P - K * s.C * P) * m.A.transpose() + m.Q;
    P = symmetrize(P);
  }
  return P;
}

}  // namespace

TEST_CASE("kf_step") {
  SUBCASE("zero C row leaves the covariance untouched") {
    const SystemModel m = study_model();
    const SensorModel blind =
        SensorModel::create(Matrix::Zero(1, 2), scalar(1.0), 1.0, 0.0);
    LocalFilterState st = kf_init(m, blind, Matrix::Identity(2, 2), Vector::Zero(2));
    const LocalFilterState next = kf_step(st, Vector::Zero(1), m, blind);
    CHECK(max_abs_diff(next.post_cov, st.prior_cov) < 1e-14);
  }
  SUBCASE("scalar update and predict") {
    const SystemModel m = SystemModel::create(scalar(1.1), scalar(1.0));
    const SensorModel s = SensorModel::create(scalar(1.0), scalar(1.0), 1.0, 0.0);
    LocalFilterState st = kf_init(m, s, scalar(1.0), Vector::Zero(1));
    const LocalFilterState next = kf_step(st, Vector::Zero(1), m, s);
    CHECK(next.post_cov(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(next.prior_cov(0, 0) == doctest::Approx(1.605).epsilon(1e-12));
    CHECK(next.gain(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("iteration converges to the steady state") {
    const SystemModel m = study_model();
    const SensorModel s = study_sensor();
    const SteadyStateFilter ss = dare_steady_state(m, s);
    LocalFilterState st = kf_init(m, s, m.Q, Vector::Zero(2));
    for (int i = 0; i < 10000; ++i) st = kf_step(st, Vector::Zero(1), m, s);
    CHECK(max_abs_diff(st.prior_cov, ss.prior_cov) < 1e-8);
  }
  SUBCASE("covariance path ignores the measurement values") {
    const SystemModel m = study_model();
    const SensorModel s = study_sensor();
    LocalFilterState a = kf_init(m, s, m.Q, Vector::Zero(2));
    LocalFilterState b = a;
    RngStream rng(3, 0, 50);
    for (int i = 0; i < 50; ++i) {
      a = kf_step(a, Vector::Constant(1, rng.gaussian()), m, s);
      b = kf_step(b, Vector::Constant(1, rng.gaussian()), m, s);
      CHECK(max_abs_diff(a.post_cov, b.post_cov) == 0.0);
    }
  }
}

TEST_CASE("dare_steady_state") {
  SUBCASE("study posterior matches the recorded value") {
    const SteadyStateFilter ss = dare_steady_state(study_model(), study_sensor());
    const Matrix expected = mat2(1.3762, -0.9014, -0.9014, 1.1867);
    CHECK(max_abs_diff(ss.post_cov, expected) < 1e-3);
  }
  SUBCASE("memoryless plant") {
    Matrix C(1, 2);
    C << 1.0, 0.5;
    const SystemModel m =
        SystemModel::create(Matrix::Zero(2, 2), mat2(2.0, 0.3, 0.3, 1.0));
    const SensorModel s = SensorModel::create(C, scalar(1.0), 1.0, 0.0);
    const SteadyStateFilter ss = dare_steady_state(m, s);
    CHECK(max_abs_diff(ss.prior_cov, m.Q) < 1e-11);
    const Matrix expected_gain =
        m.Q * C.transpose() * (C * m.Q * C.transpose() + s.R).inverse();
    CHECK(max_abs_diff(ss.gain, expected_gain) < 1e-11);
  }
  SUBCASE("scalar sensor against the independent oracle") {
    const SystemModel m = SystemModel::create(scalar(1.1), scalar(1.0));
    const SensorModel s = SensorModel::create(scalar(1.5), scalar(1.0), 0.8, 1.0);
    const SteadyStateFilter ss = dare_steady_state(m, s);
    CHECK(max_abs_diff(ss.prior_cov, riccati_oracle(m, s, 2000)) < 1e-9);
  }
  SUBCASE("undetectable unstable pair diverges with a diagnostic") {
    const SystemModel m = SystemModel::create(scalar(2.0), scalar(1.0));
    const SensorModel s = SensorModel::create(Matrix::Zero(1, 1), scalar(1.0), 1.0, 0.0);
    CHECK_THROWS_AS(dare_steady_state(m, s), PreconditionError);
  }
}

TEST_CASE("Riccati iteration is monotone from zero") {
  const SystemModel m = study_model();
  const SensorModel s = study_sensor();
  Matrix P = Matrix::Zero(2, 2);
  double prev = 0.0;
  for (int i = 0; i < 200; ++i) {
    const Matrix S = s.C * P * s.C.transpose() + s.R;
    const Matrix K = P * s.C.transpose() * S.inverse();
    P = symmetrize(m.A * (P - K * s.C * P) * m.A.transpose() + m.Q);
    CHECK(P.trace() >= prev - 1e-9);
    prev = P.trace();
  }
}

TEST_CASE("steady-state identities") {
  const SystemModel m = study_model();
  const SensorModel s = study_sensor();
  const SteadyStateFilter ss = dare_steady_state(m, s);
  const Matrix ikc = Matrix::Identity(2, 2) - ss.gain * s.C;

  // A Pbar^s (I - K^s C)^T A^T + Q = Pbar^s
  const Matrix lhs1 = m.A * ss.prior_cov * ikc.transpose() * m.A.transpose() + m.Q;
  CHECK(max_abs_diff(lhs1, ss.prior_cov) < 1e-9);

  // K^s C Pbar^s (I - K^s C)^T = K^s R K^s^T
  const Matrix lhs2 = ss.gain * s.C * ss.prior_cov * ikc.transpose();
  const Matrix rhs2 = ss.gain * s.R * ss.gain.transpose();
  CHECK(max_abs_diff(lhs2, rhs2) < 1e-9);

  // gain satisfies its defining equation
  const Matrix defect =
      ss.gain * (s.C * ss.prior_cov * s.C.transpose() + s.R) -
      ss.prior_cov * s.C.transpose();
  CHECK(defect.norm() < 1e-10);
}
