#pragma once

#include "gw/gaussian.hpp"
#include "gw/rdf.hpp"

namespace gw {

// Parameters of a jointly Gaussian auxiliary vector W: its own covariance
// and its cross-covariance with the stacked source pair. n = 0 encodes a
// degenerate W carrying nothing.
struct AuxParam {
  Index n = 0;
  Matrix q_w;  // n x n, PSD (singular allowed; handled via pseudo-inverse)
  Matrix c;    // (p1+p2) x n cross-covariance Cov((X1,X2), W)

  // W independent of everything (n = 0).
  static AuxParam independent(Index p_total);

  // Gauge-fixed parametrization with Cov(W) = I.
  static AuxParam canonical(Matrix cross);
};

// Explicit linear realization (X1, X2) = gain * W + Z with Z ~ N(0, q_z)
// independent of W.
struct JointRealization {
  Matrix gain;  // (p1+p2) x n
  Matrix q_z;   // conditional covariance of the pair given W
  Matrix q_w;
};

// Forward test channel reconstructing one source from itself and W:
//   Xhat = h X + shift W + V,  V ~ N(0, q_v) independent of (X, W).
// Built so that the conditional mean of X given (Xhat, W) is Xhat itself
// and the achieved square error is trace(q_e).
struct TestChannel {
  Matrix h;
  Matrix shift;
  Matrix q_v;
  Matrix q_e;
};

// Conditional covariance blocks of the pair given W. Throws InfeasibleAux
// if the implied conditional covariance is indefinite beyond tolerance or
// the cross-covariance sticks out of the range of q_w.
CondCov cond_cov_from_aux(const SourceSpec& spec, const AuxParam& aux);

// The same computation packaged as a sampling-ready realization.
JointRealization build_joint_realization(const SourceSpec& spec,
                                         const AuxParam& aux);

// Auxiliary that renders the sources conditionally independent: requires
// a1 * a2' to reproduce the cross-covariance block and each
// Cov(Xi) - ai * ai' to stay PSD. Returns the canonical (Cov(W) = I)
// parametrization with c = [a1; a2]. Throws InfeasibleFactorization.
AuxParam build_ci_aux(const SourceSpec& spec, const Matrix& a1,
                      const Matrix& a2);

// Builds the test channel realizing error covariance q_e against the
// conditional covariance q_cond, where q_xw and q_w describe the source's
// coupling to W. q_e must commute with q_cond (they share an eigenbasis
// by construction when q_e comes from the water-filler) and fit inside
// it; otherwise IncompatibleErrorCov.
TestChannel build_test_channel(const Matrix& q_cond, const Matrix& q_e,
                               const Matrix& q_xw, const Matrix& q_w);

// Water-fills the conditional covariance of the selected source (1 or 2)
// at budget delta and builds the resulting channel.
TestChannel test_channel_for_source(const SourceSpec& spec,
                                    const AuxParam& aux, int source,
                                    double delta);

// Covariance of the stacked system (W, X1, X2[, Xhat1][, Xhat2]) implied
// by a realization; channel blocks appear only for non-null channels.
Matrix system_covariance(const SourceSpec& spec, const AuxParam& aux,
                         const TestChannel* tc1, const TestChannel* tc2);

// Operator-norm residual of E[X_source | Xhat_source, W] - Xhat_source,
// measured on the support of (Xhat, W). Zero (to rounding) exactly when
// the channel has the conditional-mean property it was built for.
double verify_structural_property(const SourceSpec& spec, const AuxParam& aux,
                                  const TestChannel& tc, int source);

}  // namespace gw
