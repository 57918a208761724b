// Microbenchmarks for the hot paths: conditioning, water-filling, the
// joint-rate barrier solver, the weighted-objective optimizer, and the
// sampler. Run with --benchmark_filter=<regex> to narrow.

#include <benchmark/benchmark.h>

#include <random>

#include "gw/gaussian.hpp"
#include "gw/mc.hpp"
#include "gw/rdf.hpp"
#include "gw/region.hpp"
#include "gw/wchannel.hpp"

namespace {

using gw::Index;
using gw::Matrix;

Matrix random_pd(std::mt19937_64& rng, Index p) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(p, p);
  for (Index i = 0; i < p; ++i)
    for (Index j = 0; j < p; ++j) g(i, j) = gauss(rng);
  Matrix q =
      g * g.transpose() / double(p) + 0.05 * Matrix::Identity(p, p);
  return 0.5 * (q + q.transpose());
}

gw::SourceSpec random_spec(std::mt19937_64& rng, Index p1, Index p2) {
  const Matrix joint = random_pd(rng, p1 + p2);
  gw::SourceSpec spec;
  spec.p1 = p1;
  spec.p2 = p2;
  spec.q_x1 = joint.topLeftCorner(p1, p1);
  spec.q_x2 = joint.bottomRightCorner(p2, p2);
  spec.q_x1x2 = joint.topRightCorner(p1, p2);
  return spec;
}

void BM_Waterfill(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const Index p = state.range(0);
  const Matrix q = random_pd(rng, p);
  const double delta = 0.3 * q.trace();
  for (auto _ : state) {
    benchmark::DoNotOptimize(gw::conditional_rdf(q, delta).rate);
  }
}
BENCHMARK(BM_Waterfill)->Arg(8)->Arg(32);

void BM_SchurConditional(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const Index p = state.range(0);
  const Matrix q = random_pd(rng, 2 * p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gw::schur_conditional(q, p, gw::Block::second));
  }
}
BENCHMARK(BM_SchurConditional)->Arg(16)->Arg(64);

void BM_MutualInformation(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const gw::SourceSpec spec = random_spec(rng, 3, 3);
  std::normal_distribution<double> gauss(0.0, 0.2);
  Matrix c(6, 2);
  for (Index i = 0; i < 6; ++i)
    for (Index j = 0; j < 2; ++j) c(i, j) = gauss(rng);
  const Matrix q = spec.joint();
  while (Eigen::SelfAdjointEigenSolver<Matrix>(q - c * c.transpose())
             .eigenvalues()
             .minCoeff() < 1e-3) {
    c *= 0.7;
  }
  const gw::AuxParam aux = gw::AuxParam::canonical(c);
  for (auto _ : state) {
    const gw::CondCov cond = gw::cond_cov_from_aux(spec, aux);
    benchmark::DoNotOptimize(gw::mutual_information(spec, cond));
  }
}
BENCHMARK(BM_MutualInformation);

void BM_JointRate(benchmark::State& state) {
  std::mt19937_64 rng(4);
  const gw::SourceSpec spec = random_spec(rng, 2, 2);
  const gw::DistortionPair dist{0.15 * spec.q_x1.trace(),
                                0.2 * spec.q_x2.trace()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(gw::joint_rdf(spec, dist).rate);
  }
}
BENCHMARK(BM_JointRate);

void BM_MinimizeCommonRate(benchmark::State& state) {
  const gw::SourceSpec spec = gw::SourceSpec::correlated_scalars(0.5);
  const gw::DistortionPair dist{0.1, 0.1};
  gw::OptOptions opts;
  opts.multistarts = 4;
  opts.seed = 5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        gw::minimize_tg(spec, dist, {1.0, 1.0}, opts).value);
  }
}
BENCHMARK(BM_MinimizeCommonRate);

void BM_SampleJoint(benchmark::State& state) {
  std::mt19937_64 rng(6);
  const gw::SourceSpec spec = random_spec(rng, 2, 2);
  const gw::AuxParam aux =
      gw::AuxParam::canonical(0.2 * Matrix::Ones(4, 1));
  const Index count = state.range(0);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gw::sample_joint(spec, aux, count, ++seed));
  }
  state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_SampleJoint)->Arg(100000);

}  // namespace

BENCHMARK_MAIN();
