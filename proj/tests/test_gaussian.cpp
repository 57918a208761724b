#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "gw/errors.hpp"
#include "gw/gaussian.hpp"
#include "gw/rng.hpp"
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

// A feasible auxiliary: cross-covariance scaled until the conditional
// covariance stays comfortably positive definite.
gw::AuxParam random_feasible_aux(const gw::SourceSpec& spec, int n,
                                 std::mt19937_64& gen) {
  std::normal_distribution<double> normal;
  const gw::Index p = spec.p1 + spec.p2;
  Matrix c(p, n);
  for (gw::Index i = 0; i < p; ++i) {
    for (int j = 0; j < n; ++j) c(i, j) = normal(gen);
  }
  const Matrix q = spec.joint();
  for (int k = 0; k < 60; ++k) {
    const Matrix qz = gw::symmetrize(q - c * c.transpose());
    if (gw::min_eigenvalue(qz) > 1e-6 * gw::max_eigenvalue(q)) break;
    c *= 0.7;
  }
  return gw::AuxParam::canonical(c);
}

}  // namespace

TEST_CASE("schur complement of an identity with empty coupling") {
  const Matrix q = Matrix::Identity(4, 4);
  const Matrix out = gw::schur_conditional(q, 2, gw::Block::second);
  CHECK(out.rows() == 2);
  CHECK((out - Matrix::Identity(2, 2)).norm() == doctest::Approx(0.0));
}

TEST_CASE("schur complement of a correlated scalar pair") {
  Matrix q(2, 2);
  q << 1.0, 0.5, 0.5, 1.0;
  const Matrix out = gw::schur_conditional(q, 1, gw::Block::second);
  CHECK(out(0, 0) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("schur complement of a 2+1 block instance") {
  Matrix q(3, 3);
  q << 1.0, 0.36, 0.6,  //
      0.36, 1.0, 0.6,   //
      0.6, 0.6, 1.0;
  const Matrix out = gw::schur_conditional(q, 2, gw::Block::second);
  CHECK(out(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(out(1, 1) == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(std::fabs(out(0, 1)) <= 1e-14);
  CHECK(std::fabs(out(1, 0)) <= 1e-14);
}

TEST_CASE("conditioning on the leading block returns the trailing size") {
  Matrix q(3, 3);
  q << 2.0, 0.3, 0.1,  //
      0.3, 1.5, 0.2,   //
      0.1, 0.2, 1.0;
  const Matrix out = gw::schur_conditional(q, 1, gw::Block::first);
  CHECK(out.rows() == 2);
  const Matrix expected =
      q.bottomRightCorner(2, 2) -
      q.bottomLeftCorner(2, 1) * q.topLeftCorner(1, 1).inverse() *
          q.topRightCorner(1, 2);
  CHECK((out - expected).norm() <= 1e-14);
}

TEST_CASE("schur complements of random positive definite matrices stay psd") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 40; ++trial) {
    const int p = 2 + static_cast<int>(trial % 6);
    const int split = 1 + static_cast<int>(trial % (p - 1));
    const Matrix q = random_pd(p, gen);
    for (gw::Block block : {gw::Block::first, gw::Block::second}) {
      const Matrix out = gw::schur_conditional(q, split, block);
      CHECK(gw::is_symmetric(out, gw::tol::sym));
      CHECK(gw::min_eigenvalue(out) >= -gw::tol::psd * gw::max_eigenvalue(q));
    }
  }
}

TEST_CASE("schur complement through a singular block uses its range") {
  // Conditioning block has rank 1; the pseudo-inverse must only remove
  // variance along the observed direction.
  Matrix q(3, 3);
  q << 1.0, 0.4, 0.4,  //
      0.4, 1.0, 1.0,   //
      0.4, 1.0, 1.0;
  const Matrix out = gw::schur_conditional(q, 1, gw::Block::second);
  // Var(X | Y, Y) should equal Var(X | Y) = 1 - 0.4^2.
  CHECK(out(0, 0) == doctest::Approx(1.0 - 0.16).epsilon(1e-10));
}

TEST_CASE("asymmetric input is rejected") {
  Matrix q(2, 2);
  q << 1.0, 0.5, 0.2, 1.0;
  CHECK_THROWS_AS(gw::schur_conditional(q, 1, gw::Block::second),
                  gw::NonSymmetricInput);
}

TEST_CASE("clamped log-determinant ratio") {
  const Matrix i2 = Matrix::Identity(2, 2);
  CHECK(gw::log_det_ratio_plus(i2, i2) == 0.0);
  CHECK(gw::log_det_ratio_plus(Matrix::Constant(1, 1, 4.0),
                               Matrix::Constant(1, 1, 1.0)) ==
        doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-15));
  // Ratio below one clamps to zero rather than going negative.
  Matrix num(2, 2), den(2, 2);
  num << 1.0, 0.5, 0.5, 1.0;           // det 0.75
  den << 1.5, 0.0, 0.0, 1.0;           // det 1.5
  CHECK(gw::log_det_ratio_plus(num, den) == 0.0);
}

TEST_CASE("vanishing denominator determinant is an error") {
  const Matrix num = Matrix::Identity(2, 2);
  Matrix den(2, 2);
  den << 1.0, 1.0, 1.0, 1.0;  // singular
  CHECK_THROWS_AS(gw::log_det_ratio_plus(num, den), gw::SingularMatrix);
}

TEST_CASE("mutual information vanishes for an uncoupled auxiliary") {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);
  gw::AuxParam aux = gw::AuxParam::canonical(Matrix::Zero(2, 1));
  const gw::CondCov cond = gw::cond_cov_from_aux(spec, aux);
  CHECK(gw::mutual_information(spec, cond) == 0.0);
}

TEST_CASE("mutual information of the pinned scalar instance") {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);
  Matrix c(2, 1);
  c << 0.6, 0.6;
  const gw::CondCov cond = gw::cond_cov_from_aux(spec, gw::AuxParam::canonical(c));
  CHECK(cond.q1w(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(cond.q2w(0, 0) == doctest::Approx(0.64).epsilon(1e-14));
  CHECK(cond.q12w(0, 0) == doctest::Approx(0.14).epsilon(1e-13));
  // det Q = 0.75, det Q_Z = 0.64^2 - 0.14^2 = 0.39.
  const double expected = 0.5 * std::log(0.75 / 0.39);
  CHECK(gw::mutual_information(spec, cond) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(0.32696323370333195).epsilon(1e-15));
}

TEST_CASE("determinant factorization identity on random instances") {
  std::mt19937_64 gen(21);
  for (int trial = 0; trial < 50; ++trial) {
    const int p1 = 1 + trial % 3;
    const int p2 = 1 + (trial / 3) % 3;
    const gw::SourceSpec spec = random_spec(p1, p2, gen);
    const gw::AuxParam aux = random_feasible_aux(spec, 1 + trial % 2, gen);
    const gw::CondCov cond = gw::cond_cov_from_aux(spec, aux);
    const double factored = gw::mutual_information(spec, cond);
    const double direct = gw::log_det_ratio_plus(spec.joint(), cond.joint());
    CHECK(factored == doctest::Approx(direct).epsilon(1e-10));
    CHECK(factored >= 0.0);
    if (aux.c.norm() > 1e-8) CHECK(factored > 0.0);
  }
}

TEST_CASE("nested conditional matches its defining formula") {
  std::mt19937_64 gen(33);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix q = random_pd(4, gen);
    const gw::CondCov cond = gw::CondCov::from_joint(q, 2, 2);
    const Matrix expected =
        cond.q1w - cond.q12w * cond.q2w.inverse() * cond.q12w.transpose();
    CHECK((cond.q1_given_2w - expected).norm() <= 1e-11 * q.norm());
  }
}

TEST_CASE("source validation rejects malformed blocks") {
  gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.3);
  spec.q_x1x2 = Matrix::Zero(2, 1);
  CHECK_THROWS_AS(spec.validate(), gw::DimensionMismatch);

  gw::SourceSpec asym;
  asym.p1 = 2;
  asym.p2 = 1;
  asym.q_x1 = Matrix::Identity(2, 2);
  asym.q_x1(0, 1) = 0.3;  // asymmetric block
  asym.q_x2 = Matrix::Identity(1, 1);
  asym.q_x1x2 = Matrix::Zero(2, 1);
  CHECK_THROWS_AS(asym.validate(), gw::NonSymmetricInput);

  // |correlation| >= 1 makes the joint covariance lose rank.
  CHECK_THROWS_AS(gw::SourceSpec::correlated_scalars(1.0).validate(),
                  gw::SingularMatrix);
  CHECK_THROWS_AS(gw::SourceSpec::correlated_scalars(1.2).validate(),
                  gw::SingularMatrix);
  CHECK_NOTHROW(gw::SourceSpec::correlated_scalars(0.99).validate());
}

TEST_CASE("library stream is reproducible and well scaled") {
  // Counter addressing is pure: same (seed, counter) gives the same word.
  CHECK(gw::rng::word_at(1, 5) == gw::rng::word_at(1, 5));
  CHECK(gw::rng::word_at(1, 5) != gw::rng::word_at(2, 5));
  CHECK(gw::rng::word_at(1, 5) != gw::rng::word_at(1, 6));
  // Uniforms live strictly inside (0, 1).
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const double u = gw::rng::uniform_at(99, k);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
  // The inverse normal CDF hits the symmetric quantiles.
  CHECK(gw::rng::normal_icdf(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(gw::rng::normal_icdf(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-12));
  CHECK(gw::rng::normal_icdf(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-12));
}
