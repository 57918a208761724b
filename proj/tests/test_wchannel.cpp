#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "gw/errors.hpp"
#include "gw/gaussian.hpp"
#include "gw/rdf.hpp"
#include "gw/tolerances.hpp"
#include "gw/wchannel.hpp"

using gw::Matrix;
using gw::Vector;

namespace {

Matrix random_pd(int p, std::mt19937_64& gen, double jitter = 0.2) {
  std::normal_distribution<double> normal;
  Matrix a(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) a(i, j) = normal(gen);
  }
  return gw::symmetrize(a * a.transpose()) + jitter * Matrix::Identity(p, p);
}

gw::SourceSpec random_spec(int p1, int p2, std::mt19937_64& gen) {
  gw::SourceSpec spec;
  spec.p1 = p1;
  spec.p2 = p2;
  const Matrix q = random_pd(p1 + p2, gen);
  spec.q_x1 = q.topLeftCorner(p1, p1);
  spec.q_x2 = q.bottomRightCorner(p2, p2);
  spec.q_x1x2 = q.topRightCorner(p1, p2);
  spec.validate();
  return spec;
}

gw::AuxParam random_feasible_aux(const gw::SourceSpec& spec, int n,
                                 std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  const Matrix q = spec.joint();
  Matrix c(q.rows(), n);
  for (int i = 0; i < c.rows(); ++i) {
    for (int j = 0; j < n; ++j) c(i, j) = normal(gen);
  }
  while (gw::min_eigenvalue(gw::symmetrize(q - c * c.transpose())) <=
         1e-4 * gw::max_eigenvalue(q)) {
    c *= 0.7;
  }
  return gw::AuxParam::canonical(c);
}

// The frozen scalar workhorse: unit variances, correlation 1/2, and the
// symmetric canonical auxiliary with cross-covariance (0.6, 0.6).
gw::SourceSpec frozen_spec() { return gw::SourceSpec::correlated_scalars(0.5); }

gw::AuxParam frozen_aux() {
  Matrix c(2, 1);
  c << 0.6, 0.6;
  return gw::AuxParam::canonical(c);
}

double system_distortion(const Matrix& sys, gw::Index x_at, gw::Index hat_at,
                         gw::Index p) {
  const Matrix q_x = sys.block(x_at, x_at, p, p);
  const Matrix q_hat = sys.block(hat_at, hat_at, p, p);
  const Matrix cross = sys.block(x_at, hat_at, p, p);
  return (q_x + q_hat - cross - cross.transpose()).trace();
}

}  // namespace

TEST_CASE("degenerate auxiliaries leave the pair unconditioned") {
  const gw::SourceSpec spec = frozen_spec();

  const gw::CondCov none = gw::cond_cov_from_aux(spec, gw::AuxParam::independent(2));
  CHECK((none.q1w - spec.q_x1).norm() <= 1e-14);
  CHECK((none.q2w - spec.q_x2).norm() <= 1e-14);
  CHECK((none.q12w - spec.q_x1x2).norm() <= 1e-14);

  const gw::CondCov zero =
      gw::cond_cov_from_aux(spec, gw::AuxParam::canonical(Matrix::Zero(2, 1)));
  CHECK((zero.joint() - spec.joint()).norm() <= 1e-14);
}

TEST_CASE("conditional blocks of the frozen auxiliary") {
  const gw::CondCov cond = gw::cond_cov_from_aux(frozen_spec(), frozen_aux());
  CHECK(cond.q1w(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(cond.q2w(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(cond.q12w(0, 0) == doctest::Approx(0.14).epsilon(1e-13));
}

TEST_CASE("overscaled cross-covariance is rejected") {
  Matrix c(2, 1);
  c << 1.2, 0.0;
  CHECK_THROWS_AS(gw::cond_cov_from_aux(frozen_spec(), gw::AuxParam::canonical(c)),
                  gw::InfeasibleAux);
}

TEST_CASE("cross-covariance must live in the range of Cov(W)") {
  const gw::SourceSpec spec = frozen_spec();
  gw::AuxParam aux;
  aux.n = 2;
  aux.q_w = Matrix::Zero(2, 2);
  aux.q_w(0, 0) = 1.0;
  aux.c = Matrix::Zero(2, 2);
  aux.c(0, 0) = 0.3;
  aux.c(1, 0) = 0.3;

  // Column aligned with the null space of Cov(W): impossible covariance.
  gw::AuxParam bad = aux;
  bad.c(0, 1) = 0.2;
  CHECK_THROWS_AS(gw::cond_cov_from_aux(spec, bad), gw::InfeasibleAux);

  // A zero column in the null direction is fine and matches the n=1 case.
  const gw::CondCov via_singular = gw::cond_cov_from_aux(spec, aux);
  Matrix c1(2, 1);
  c1 << 0.3, 0.3;
  const gw::CondCov via_reduced =
      gw::cond_cov_from_aux(spec, gw::AuxParam::canonical(c1));
  CHECK((via_singular.joint() - via_reduced.joint()).norm() <= 1e-12);
}

TEST_CASE("joint realization reproduces the pair covariance") {
  const gw::SourceSpec spec = frozen_spec();

  const gw::JointRealization none =
      gw::build_joint_realization(spec, gw::AuxParam::independent(2));
  CHECK(none.gain.cols() == 0);
  CHECK((none.q_z - spec.joint()).norm() <= 1e-14);

  const gw::JointRealization frozen =
      gw::build_joint_realization(spec, frozen_aux());
  CHECK(frozen.gain(0, 0) == doctest::Approx(0.6).epsilon(1e-13));
  CHECK(frozen.gain(1, 0) == doctest::Approx(0.6).epsilon(1e-13));
  Matrix qz_expected(2, 2);
  qz_expected << 0.64, 0.14, 0.14, 0.64;
  CHECK((frozen.q_z - qz_expected).norm() <= 1e-13);

  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 20; ++trial) {
    const gw::SourceSpec rnd = random_spec(1 + trial % 3, 1 + (trial / 3) % 3, gen);
    const gw::AuxParam aux = random_feasible_aux(rnd, 1 + trial % 2, gen);
    const gw::JointRealization real = gw::build_joint_realization(rnd, aux);
    const Matrix rebuilt = gw::symmetrize(
        real.gain * real.q_w * real.gain.transpose() + real.q_z);
    CHECK((rebuilt - rnd.joint()).norm() <= 1e-10 * rnd.joint().norm());
    CHECK((real.gain * real.q_w - aux.c).norm() <= 1e-10 * aux.c.norm() + 1e-12);
  }
}

TEST_CASE("conditioning is invariant under invertible remixes of W") {
  const gw::SourceSpec spec = frozen_spec();
  const gw::AuxParam base = frozen_aux();

  // W -> 2W rescales Cov(W) by 4 and the cross-covariance by 2.
  gw::AuxParam scaled;
  scaled.n = 1;
  scaled.q_w = 4.0 * Matrix::Identity(1, 1);
  scaled.c = 2.0 * base.c;
  CHECK((gw::cond_cov_from_aux(spec, scaled).joint() -
         gw::cond_cov_from_aux(spec, base).joint())
            .norm() <= 1e-12);

  std::mt19937_64 gen(13);
  std::normal_distribution<double> normal;
  const gw::SourceSpec rnd = random_spec(2, 2, gen);
  const gw::AuxParam aux = random_feasible_aux(rnd, 2, gen);
  Matrix s(2, 2);
  do {
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) s(i, j) = normal(gen);
    }
  } while (std::fabs(s.determinant()) < 1e-2);
  gw::AuxParam mixed;
  mixed.n = 2;
  mixed.q_w = gw::symmetrize(s * aux.q_w * s.transpose());
  mixed.c = aux.c * s.transpose();
  CHECK((gw::cond_cov_from_aux(rnd, mixed).joint() -
         gw::cond_cov_from_aux(rnd, aux).joint())
            .norm() <= 1e-9 * rnd.joint().norm());
}

TEST_CASE("conditional-independence factorization") {
  const gw::SourceSpec spec = frozen_spec();
  const double root = std::sqrt(0.5);
  const gw::AuxParam aux = gw::build_ci_aux(
      spec, Matrix::Constant(1, 1, root), Matrix::Constant(1, 1, root));
  CHECK(aux.n == 1);
  const gw::CondCov cond = gw::cond_cov_from_aux(spec, aux);
  CHECK(std::fabs(cond.q12w(0, 0)) <= 1e-12);
  CHECK(cond.q1w(0, 0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(cond.q2w(0, 0) == doctest::Approx(0.5).epsilon(1e-13));

  // Uncorrelated pair: the zero factorization is the valid one.
  const gw::SourceSpec indep = gw::SourceSpec::correlated_scalars(0.0);
  const gw::AuxParam trivial =
      gw::build_ci_aux(indep, Matrix::Zero(1, 1), Matrix::Zero(1, 1));
  const gw::CondCov cond0 = gw::cond_cov_from_aux(indep, trivial);
  CHECK((cond0.joint() - indep.joint()).norm() <= 1e-14);

  // Factors that miss the cross-covariance are rejected.
  CHECK_THROWS_AS(gw::build_ci_aux(spec, Matrix::Constant(1, 1, 0.9),
                                   Matrix::Constant(1, 1, 0.9)),
                  gw::InfeasibleFactorization);
  // Factors that overdrain a marginal are rejected even when the cross
  // block matches.
  CHECK_THROWS_AS(gw::build_ci_aux(spec, Matrix::Constant(1, 1, 1.1),
                                   Matrix::Constant(1, 1, 0.5 / 1.1)),
                  gw::InfeasibleFactorization);
}

TEST_CASE("test channel against an unconditioned diagonal source") {
  Matrix q(2, 2);
  q.setZero();
  q.diagonal() << 4.0, 1.0;
  const gw::WaterfillSolution wf = gw::marginal_rdf(q, 2.0);
  const gw::TestChannel tc = gw::build_test_channel(
      q, wf.q_e, Matrix::Zero(2, 0), Matrix::Zero(0, 0));
  Matrix h_expected(2, 2);
  h_expected.setZero();
  h_expected(0, 0) = 0.75;
  CHECK((tc.h - h_expected).norm() <= 1e-10);
  CHECK((tc.q_v - h_expected).norm() <= 1e-10);  // q_v = diag(3/4, 0) too
  CHECK(tc.shift.cols() == 0);
  CHECK((tc.q_e - Matrix::Identity(2, 2)).norm() <= 1e-9);
}

TEST_CASE("zero-rate and near-lossless channel limits") {
  Matrix q(2, 2);
  q << 2.0, 0.3, 0.3, 1.0;

  // Budget covers the whole variance: the channel reconstructs from W only.
  const gw::TestChannel lazy = gw::build_test_channel(
      q, q, Matrix::Zero(2, 0), Matrix::Zero(0, 0));
  CHECK(lazy.h.norm() <= 1e-12);
  CHECK(lazy.q_v.norm() <= 1e-12);

  // Vanishing error covariance: the channel copies the source.
  const gw::TestChannel sharp = gw::build_test_channel(
      q, 1e-8 * Matrix::Identity(2, 2), Matrix::Zero(2, 0), Matrix::Zero(0, 0));
  CHECK((sharp.h - Matrix::Identity(2, 2)).norm() <= 1e-7);
}

TEST_CASE("error covariances outside the solvable family are rejected") {
  Matrix q(2, 2);
  q.setZero();
  q.diagonal() << 4.0, 1.0;

  Matrix skew(2, 2);
  skew << 0.5, 0.2, 0.2, 0.5;  // does not commute with diag(4, 1)
  CHECK_THROWS_AS(gw::build_test_channel(q, skew, Matrix::Zero(2, 0),
                                         Matrix::Zero(0, 0)),
                  gw::IncompatibleErrorCov);

  Matrix big(2, 2);
  big.setZero();
  big.diagonal() << 5.0, 0.5;  // exceeds the source variance in one mode
  CHECK_THROWS_AS(gw::build_test_channel(q, big, Matrix::Zero(2, 0),
                                         Matrix::Zero(0, 0)),
                  gw::IncompatibleErrorCov);
}

TEST_CASE("channels built for the frozen instance") {
  const gw::SourceSpec spec = frozen_spec();
  const gw::AuxParam aux = frozen_aux();
  const gw::TestChannel tc = gw::test_channel_for_source(spec, aux, 1, 0.1);
  CHECK(tc.q_e(0, 0) == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(tc.h(0, 0) == doctest::Approx(1.0 - 0.1 / 0.64).epsilon(1e-12));
  CHECK(gw::verify_structural_property(spec, aux, tc, 1) <= 1e-9);

  const Matrix sys = gw::system_covariance(spec, aux, &tc, nullptr);
  REQUIRE(sys.rows() == 4);  // (W, X1, X2, Xhat1)
  CHECK(system_distortion(sys, 1, 3, 1) == doctest::Approx(0.1).epsilon(1e-10));
}

TEST_CASE("conditional-mean property holds across random channels") {
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int p1 = 1 + trial % 3;
    const int p2 = 1 + (trial / 3) % 3;
    const gw::SourceSpec spec = random_spec(p1, p2, gen);
    const gw::AuxParam aux = random_feasible_aux(spec, 1 + trial % 2, gen);
    const int source = 1 + trial % 2;
    const Matrix q_own = source == 1 ? spec.q_x1 : spec.q_x2;
    // Span budgets from deep compression up to zero-rate saturation.
    const double delta = q_own.trace() * (0.05 + 1.1 * unif(gen));
    const gw::TestChannel tc =
        gw::test_channel_for_source(spec, aux, source, delta);
    CHECK(gw::verify_structural_property(spec, aux, tc, source) <= 1e-9);
  }
}

TEST_CASE("tampered channel gains are detected") {
  std::mt19937_64 gen(43);
  const gw::SourceSpec spec = random_spec(2, 2, gen);
  const gw::AuxParam aux = random_feasible_aux(spec, 1, gen);
  gw::TestChannel tc = gw::test_channel_for_source(spec, aux, 1, 0.5);
  REQUIRE(gw::verify_structural_property(spec, aux, tc, 1) <= 1e-9);
  tc.h(0, 0) += 0.1;
  CHECK(gw::verify_structural_property(spec, aux, tc, 1) > 1e-3);
}

TEST_CASE("system covariance carries both channels and their distortions") {
  std::mt19937_64 gen(47);
  const gw::SourceSpec spec = random_spec(2, 1, gen);
  const gw::AuxParam aux = random_feasible_aux(spec, 2, gen);
  const double d1 = 0.4 * spec.q_x1.trace();
  const double d2 = 0.3 * spec.q_x2.trace();
  const gw::TestChannel tc1 = gw::test_channel_for_source(spec, aux, 1, d1);
  const gw::TestChannel tc2 = gw::test_channel_for_source(spec, aux, 2, d2);

  const Matrix sys = gw::system_covariance(spec, aux, &tc1, &tc2);
  REQUIRE(sys.rows() == 2 + 2 + 1 + 2 + 1);  // (W, X1, X2, Xhat1, Xhat2)
  CHECK(gw::is_symmetric(sys, 1e-12));
  CHECK(gw::min_eigenvalue(sys) >= -1e-9 * gw::max_eigenvalue(sys));
  CHECK(system_distortion(sys, 2, 5, 2) ==
        doctest::Approx(tc1.q_e.trace()).epsilon(1e-10));
  CHECK(system_distortion(sys, 4, 7, 1) ==
        doctest::Approx(tc2.q_e.trace()).epsilon(1e-10));
}
