#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>
#include <utility>

#include "doctest.h"
#include "gw/errors.hpp"
#include "gw/mc.hpp"
#include "gw/rdf.hpp"
#include "gw/tolerances.hpp"

using gw::Matrix;

namespace {

gw::AuxParam frozen_aux() {
  Matrix c(2, 1);
  c << 0.6, 0.6;
  return gw::AuxParam::canonical(c);
}

}  // namespace

TEST_CASE("sampling is reproducible bit for bit") {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);
  const gw::AuxParam aux = frozen_aux();
  const gw::SampleBatch a = gw::sample_joint(spec, aux, 512, 42);
  const gw::SampleBatch b = gw::sample_joint(spec, aux, 512, 42);
  REQUIRE(a.data.rows() == 512);
  REQUIRE(a.data.cols() == 3);  // (W, X1, X2)
  CHECK((a.data - b.data).norm() == 0.0);

  const gw::SampleBatch other = gw::sample_joint(spec, aux, 512, 43);
  CHECK((a.data - other.data).norm() != 0.0);
}

TEST_CASE("sharded batches concatenate to the unsharded stream") {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);
  const gw::AuxParam aux = frozen_aux();
  const gw::SampleBatch whole = gw::sample_joint(spec, aux, 600, 7);
  const gw::SampleBatch head = gw::sample_joint(spec, aux, 250, 7, 0);
  const gw::SampleBatch tail = gw::sample_joint(spec, aux, 350, 7, 250);
  CHECK((whole.data.topRows(250) - head.data).norm() == 0.0);
  CHECK((whole.data.bottomRows(350) - tail.data).norm() == 0.0);

  // The channel-bearing overload shards the same way.
  const gw::DistortionPair dist{0.1, 0.1};
  const gw::SampleBatch full = gw::sample_joint(spec, aux, dist, 400, 11);
  REQUIRE(full.data.cols() == 5);  // (W, X1, X2, hatX1, hatX2)
  const gw::SampleBatch part = gw::sample_joint(spec, aux, dist, 150, 11, 250);
  CHECK((full.data.bottomRows(150) - part.data).norm() == 0.0);
}

TEST_CASE("empirical covariance converges to the model covariance") {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);
  const gw::AuxParam aux = frozen_aux();
  const gw::SampleBatch batch = gw::sample_joint(spec, aux, 200000, 3);
  const Matrix cov = gw::empirical_covariance(batch);
  Matrix expected(3, 3);
  expected << 1.0, 0.6, 0.6,
              0.6, 1.0, 0.5,
              0.6, 0.5, 1.0;
  CHECK((cov - expected).norm() <= 0.02);
}

TEST_CASE("plug-in mutual information tracks the closed form") {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);

  // Decoupled auxiliary: the true value is zero.
  const gw::SampleBatch null_batch = gw::sample_joint(
      spec, gw::AuxParam::canonical(Matrix::Zero(2, 1)), 1000000, 19);
  CHECK(std::fabs(gw::empirical_mi(null_batch)) <= 0.01);

  // Frozen auxiliary: the true value is (1/2) ln(0.75/0.39).
  const double truth = 0.32696323370333195;
  for (const std::uint64_t seed : {101ULL, 202ULL}) {
    const gw::SampleBatch batch =
        gw::sample_joint(spec, frozen_aux(), 1000000, seed);
    CAPTURE(seed);
    CHECK(std::fabs(gw::empirical_mi(batch) - truth) <= 0.01);
  }

  // The raw-matrix entry point agrees with the batch one.
  const gw::SampleBatch batch = gw::sample_joint(spec, frozen_aux(), 4096, 5);
  CHECK(gw::empirical_mi(batch) ==
        doctest::Approx(gw::empirical_mi(batch.data, 1)).epsilon(1e-14));
}

TEST_CASE("empirical distortions follow the water-filled budgets") {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);
  const gw::AuxParam aux = frozen_aux();

  // Binding budgets: the achieved error matches the requested budget.
  const gw::SampleBatch tight =
      gw::sample_joint(spec, aux, {0.1, 0.2}, 400000, 23);
  const std::pair<double, double> d_tight = gw::empirical_distortion(tight);
  CHECK(d_tight.first == doctest::Approx(0.1).epsilon(0.03));
  CHECK(d_tight.second == doctest::Approx(0.2).epsilon(0.03));

  // Saturated budgets: the reconstruction collapses to the conditional
  // mean, so the error is the full conditional variance 0.64.
  const gw::SampleBatch loose =
      gw::sample_joint(spec, aux, {5.0, 5.0}, 400000, 29);
  const std::pair<double, double> d_loose = gw::empirical_distortion(loose);
  CHECK(d_loose.first == doctest::Approx(0.64).epsilon(0.03));
  CHECK(d_loose.second == doctest::Approx(0.64).epsilon(0.03));

  // Nearly lossless budgets: next to no error.
  const gw::SampleBatch sharp =
      gw::sample_joint(spec, aux, {1e-6, 1e-6}, 50000, 31);
  const std::pair<double, double> d_sharp = gw::empirical_distortion(sharp);
  CHECK(d_sharp.first <= 2e-6);
  CHECK(d_sharp.second <= 2e-6);

  // Channel-free batches cannot measure distortion.
  const gw::SampleBatch plain = gw::sample_joint(spec, aux, 16, 37);
  CHECK_THROWS_AS(gw::empirical_distortion(plain), gw::Error);
}

TEST_CASE("validation passes on an honest realization") {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);
  const gw::ValidationReport rep =
      gw::validate_realization(spec, frozen_aux(), {0.1, 0.1}, 1000000, 2718);
  CHECK(rep.count == 1000000);
  CHECK(rep.analytic_mi == doctest::Approx(0.32696323370333195).epsilon(1e-12));
  CHECK(rep.analytic_d1 == doctest::Approx(0.1).epsilon(1e-9));
  CHECK(rep.mi_gap <= rep.mi_band);
  CHECK(rep.d1_gap <= rep.d1_band);
  CHECK(rep.d2_gap <= rep.d2_band);
  CHECK(rep.mi_ok);
  CHECK(rep.d1_ok);
  CHECK(rep.d2_ok);
  CHECK(rep.cov_ok);
  CHECK(rep.pass);
}

TEST_CASE("validation bands are honest across seeds") {
  // With five-sigma bands, sixty independent validations should all pass
  // except, rarely, one.
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.6);
  int failures = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const gw::ValidationReport rep =
        gw::validate_realization(spec, frozen_aux(), {0.3, 0.15}, 20000, seed);
    if (!rep.pass) ++failures;
  }
  CHECK(failures <= 1);
}

TEST_CASE("tampered reconstructions are detected") {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);
  const gw::AuxParam aux = frozen_aux();
  const gw::DistortionPair dist{0.1, 0.1};
  gw::SampleBatch batch = gw::sample_joint(spec, aux, dist, 200000, 41);

  const std::pair<double, double> before = gw::empirical_distortion(batch);
  CHECK(std::fabs(before.first - 0.1) <= 0.005);

  // Scaling the first reconstruction by 5% shifts its squared error by
  // 0.05^2 * E[hatX^2] + 2*0.05*E[hatX(hatX - X)]; the cross term vanishes
  // by the conditional-mean property, leaving a deterministic increase of
  // about 0.0025 * 0.9 that dwarfs the Monte Carlo noise.
  batch.data.col(3) *= 1.05;
  const std::pair<double, double> after = gw::empirical_distortion(batch);
  CHECK(after.first - before.first >= 0.0015);
  CHECK(std::fabs(after.second - before.second) <= 1e-12);
}

TEST_CASE("degenerate batch sizes are handled") {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);
  const gw::SampleBatch one = gw::sample_joint(spec, frozen_aux(), 1, 53);
  CHECK(one.count() == 1);
  CHECK(one.dim() == 3);
  CHECK_THROWS_AS(gw::empirical_mi(one), gw::SingularEmpirical);
}
