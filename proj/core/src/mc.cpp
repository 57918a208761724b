#include "gw/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gw/errors.hpp"
#include "gw/rng.hpp"
#include "gw/tolerances.hpp"

namespace gw {

namespace {

constexpr std::uint64_t kSampleLabel = 0x5A3B1E5ull;

SampleBatch draw(const Matrix& cov, Index n, Index p1, Index p2,
                 bool has_channels, Index count, std::uint64_t seed,
                 Index start_index) {
  SampleBatch batch;
  batch.seed = seed;
  batch.start_index = start_index;
  batch.n = n;
  batch.p1 = p1;
  batch.p2 = p2;
  batch.has_channels = has_channels;

  const Index dim = cov.rows();
  const Matrix root = sqrt_psd(cov);
  batch.data.resize(count, dim);
  const std::uint64_t stream = rng::derive_seed(seed, kSampleLabel);
  Vector z(dim);
  for (Index i = 0; i < count; ++i) {
    const std::uint64_t base =
        static_cast<std::uint64_t>(start_index + i) *
        static_cast<std::uint64_t>(dim);
    for (Index j = 0; j < dim; ++j) {
      z[j] = rng::normal_at(stream, base + static_cast<std::uint64_t>(j));
    }
    batch.data.row(i) = (root * z).transpose();
  }
  return batch;
}

}  // namespace

SampleBatch sample_joint(const SourceSpec& spec, const AuxParam& aux,
                         Index count, std::uint64_t seed, Index start_index) {
  const Matrix cov = system_covariance(spec, aux, nullptr, nullptr);
  return draw(cov, aux.n, spec.p1, spec.p2, false, count, seed, start_index);
}

SampleBatch sample_joint(const SourceSpec& spec, const AuxParam& aux,
                         const DistortionPair& dist, Index count,
                         std::uint64_t seed, Index start_index) {
  const TestChannel tc1 = test_channel_for_source(spec, aux, 1, dist.d1);
  const TestChannel tc2 = test_channel_for_source(spec, aux, 2, dist.d2);
  const Matrix cov = system_covariance(spec, aux, &tc1, &tc2);
  return draw(cov, aux.n, spec.p1, spec.p2, true, count, seed, start_index);
}

Matrix empirical_covariance(const SampleBatch& batch) {
  if (batch.count() < 2) {
    throw SingularEmpirical("need at least two samples for a covariance");
  }
  const Eigen::RowVectorXd mean = batch.data.colwise().mean();
  const Matrix centered = batch.data.rowwise() - mean;
  return symmetrize(centered.transpose() * centered /
                    static_cast<double>(batch.count()));
}

double empirical_mi(const Matrix& data, Index w_dim) {
  if (w_dim < 1 || w_dim >= data.cols()) {
    throw DimensionMismatch("partition must leave both W and source columns");
  }
  if (data.rows() < 2) {
    throw SingularEmpirical("need at least two samples for a covariance");
  }
  const Eigen::RowVectorXd mean = data.colwise().mean();
  const Matrix centered = data.rowwise() - mean;
  const Matrix cov = symmetrize(centered.transpose() * centered /
                                static_cast<double>(data.rows()));
  const Index p = data.cols() - w_dim;
  const Matrix q_x = cov.bottomRightCorner(p, p);
  const Matrix q_x_given_w = schur_conditional(cov, w_dim, Block::first);
  try {
    return log_det_ratio_plus(q_x, q_x_given_w);
  } catch (const SingularMatrix&) {
    throw SingularEmpirical(
        "empirical conditional covariance is numerically singular");
  }
}

double empirical_mi(const SampleBatch& batch) {
  const Index n = batch.n;
  const Index p = batch.p1 + batch.p2;
  return empirical_mi(batch.data.leftCols(n + p), n);
}

std::pair<double, double> empirical_distortion(const SampleBatch& batch) {
  if (!batch.has_channels) {
    throw DimensionMismatch("batch has no reconstruction columns");
  }
  const Index n = batch.n;
  const Index p1 = batch.p1;
  const Index p2 = batch.p2;
  const Index p = p1 + p2;
  const Matrix err1 =
      batch.data.middleCols(n, p1) - batch.data.middleCols(n + p, p1);
  const Matrix err2 = batch.data.middleCols(n + p1, p2) -
                      batch.data.middleCols(n + p + p1, p2);
  const double inv = 1.0 / static_cast<double>(batch.count());
  return {err1.squaredNorm() * inv, err2.squaredNorm() * inv};
}

ValidationReport validate_realization(const SourceSpec& spec,
                                      const AuxParam& aux,
                                      const DistortionPair& dist, Index count,
                                      std::uint64_t seed) {
  const CondCov cond = cond_cov_from_aux(spec, aux);
  const WaterfillSolution w1 = conditional_rdf(cond.q1w, dist.d1);
  const WaterfillSolution w2 = conditional_rdf(cond.q2w, dist.d2);
  const TestChannel tc1 =
      build_test_channel(cond.q1w, w1.q_e, aux.c.topRows(spec.p1), aux.q_w);
  const TestChannel tc2 = build_test_channel(
      cond.q2w, w2.q_e, aux.c.bottomRows(spec.p2), aux.q_w);
  const Matrix cov = system_covariance(spec, aux, &tc1, &tc2);

  const SampleBatch batch =
      draw(cov, aux.n, spec.p1, spec.p2, true, count, seed, 0);
  const Matrix emp = empirical_covariance(batch);

  ValidationReport rep;
  rep.count = count;
  const double root_count = std::sqrt(static_cast<double>(count));

  // Per-entry z-scores against the sampling noise of a Gaussian second
  // moment: Var(S_ij) = (Q_ii Q_jj + Q_ij^2) / count.
  const Index dim = cov.rows();
  double max_z = 0.0;
  for (Index i = 0; i < dim; ++i) {
    for (Index j = i; j < dim; ++j) {
      const double var =
          (cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) /
          static_cast<double>(count);
      const double diff = std::abs(emp(i, j) - cov(i, j));
      if (var > 0.0) {
        max_z = std::max(max_z, diff / std::sqrt(var));
      } else if (diff > 0.0) {
        max_z = std::numeric_limits<double>::infinity();
      }
    }
  }
  rep.max_cov_z = max_z;
  rep.empirical_cov_error =
      operator_norm(emp - cov) / std::max(operator_norm(cov), 1e-300);
  rep.cov_ok = max_z <= 5.0;

  rep.analytic_mi = mutual_information(spec, cond);
  rep.empirical_mi = empirical_mi(batch);
  rep.mi_gap = std::abs(rep.empirical_mi - rep.analytic_mi);
  const double px = static_cast<double>(spec.p1 + spec.p2);
  const double nw = static_cast<double>(aux.n);
  rep.mi_band = 5.0 * std::sqrt(2.0 * (px + 2.0 * nw)) / root_count;
  rep.mi_ok = rep.mi_gap <= rep.mi_band;

  const auto [ed1, ed2] = empirical_distortion(batch);
  rep.analytic_d1 = w1.q_e.trace();
  rep.analytic_d2 = w2.q_e.trace();
  rep.empirical_d1 = ed1;
  rep.empirical_d2 = ed2;
  rep.d1_gap = std::abs(ed1 - rep.analytic_d1);
  rep.d2_gap = std::abs(ed2 - rep.analytic_d2);
  rep.d1_band = 5.0 * std::sqrt(2.0) * w1.q_e.norm() / root_count;
  rep.d2_band = 5.0 * std::sqrt(2.0) * w2.q_e.norm() / root_count;
  rep.d1_ok = rep.d1_gap <= rep.d1_band;
  rep.d2_ok = rep.d2_gap <= rep.d2_band;

  rep.pass = rep.mi_ok && rep.d1_ok && rep.d2_ok && rep.cov_ok;
  return rep;
}

}  // namespace gw
