#pragma once

#include <cstdint>
#include <utility>

#include "gw/gaussian.hpp"
#include "gw/rdf.hpp"
#include "gw/wchannel.hpp"

namespace gw {

// A block of joint draws, one sample per row, columns laid out as
// [W | X1 | X2] or [W | X1 | X2 | hatX1 | hatX2]. Draws are counter
// indexed: sample i of a batch consumes the dim() counters starting at
// (start_index + i) * dim(), so concatenating a batch that starts at 0
// with one that starts at its count reproduces a single longer batch
// bit for bit.
struct SampleBatch {
  std::uint64_t seed = 0;
  Index start_index = 0;
  Index n = 0;
  Index p1 = 0;
  Index p2 = 0;
  bool has_channels = false;
  Matrix data;

  Index count() const { return data.rows(); }
  Index dim() const { return data.cols(); }
};

// Draws from the joint law of (W, X1, X2).
SampleBatch sample_joint(const SourceSpec& spec, const AuxParam& aux,
                         Index count, std::uint64_t seed,
                         Index start_index = 0);

// Draws from the joint law of (W, X1, X2, hatX1, hatX2), with the
// reconstruction channels solved from the per-source distortion budgets.
SampleBatch sample_joint(const SourceSpec& spec, const AuxParam& aux,
                         const DistortionPair& dist, Index count,
                         std::uint64_t seed, Index start_index = 0);

// Sample covariance of the batch (mean-subtracted, 1/count scaling).
Matrix empirical_covariance(const SampleBatch& batch);

// Plug-in Gaussian estimate of I((X1, X2); W) from the sample covariance.
double empirical_mi(const SampleBatch& batch);

// Same estimator on raw draws: one sample per row, the leading w_dim
// columns are W and every remaining column belongs to the source pair.
double empirical_mi(const Matrix& data, Index w_dim);

// Mean squared reconstruction error per source; requires channels.
std::pair<double, double> empirical_distortion(const SampleBatch& batch);

struct ValidationReport {
  Index count = 0;
  double analytic_mi = 0.0;
  double empirical_mi = 0.0;
  double mi_gap = 0.0;   // |empirical - analytic|
  double mi_band = 0.0;  // five-sigma half-width
  double analytic_d1 = 0.0;
  double empirical_d1 = 0.0;
  double d1_gap = 0.0;
  double d1_band = 0.0;
  double analytic_d2 = 0.0;
  double empirical_d2 = 0.0;
  double d2_gap = 0.0;
  double d2_band = 0.0;
  double max_cov_z = 0.0;  // worst per-entry covariance z-score
  double empirical_cov_error = 0.0;  // relative operator-norm deviation
  bool mi_ok = false;
  bool d1_ok = false;
  bool d2_ok = false;
  bool cov_ok = false;
  bool pass = false;
};

// Samples the full realization and compares the empirical second moments,
// information rate and distortions against their analytic values, with
// five-sigma acceptance bands.
ValidationReport validate_realization(const SourceSpec& spec,
                                      const AuxParam& aux,
                                      const DistortionPair& dist, Index count,
                                      std::uint64_t seed);

}  // namespace gw
