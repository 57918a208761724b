#pragma once

#include "gw/gaussian.hpp"
#include "gw/rdf.hpp"
#include "gw/tolerances.hpp"
#include "gw/wchannel.hpp"

namespace gw {

// Diagnostics for whether an auxiliary sits on the minimal-sum-rate
// plane: the three rates must add up to the joint rate-distortion value,
// the two reconstructions must be conditionally uncorrelated given the
// common message, and the common message must be recoverable from the
// reconstructions (a Markov chain, checked on second moments, which is
// exact for Gaussian realizations).
struct PanglossReport {
  double r0 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double joint_rate = 0.0;
  double sum_rate_gap = 0.0;     // r0 + r1 + r2 - joint_rate
  double ci_residual = 0.0;      // reconstructions correlated given W
  double markov_residual = 0.0;  // W not explained by the reconstructions
  double achieved_d1 = 0.0;
  double achieved_d2 = 0.0;
  bool on_plane = false;
};

PanglossReport pangloss_check(const SourceSpec& spec, const AuxParam& aux,
                              const DistortionPair& dist,
                              double plane_tol = tol::plane);

// Variant with the joint rate already solved, for sweeps over many
// auxiliaries against a fixed distortion budget. Named separately because
// a trailing-double overload of pangloss_check would be ambiguous with
// the plane_tol parameter above.
PanglossReport pangloss_check_given(const SourceSpec& spec,
                                    const AuxParam& aux,
                                    const DistortionPair& dist,
                                    double joint_rate,
                                    double plane_tol = tol::plane);

// Fully explicit variant: the caller supplies the reconstruction
// channels, which must come from the conditional rate solutions at
// `dist` under `aux` for the sum-rate bookkeeping to be meaningful.
PanglossReport pangloss_check(const SourceSpec& spec, const AuxParam& aux,
                              const TestChannel& tc1, const TestChannel& tc2,
                              const DistortionPair& dist, double joint_rate,
                              double plane_tol = tol::plane);

struct PanglossSearch {
  bool found = false;  // true iff report.on_plane
  AuxParam aux;
  PanglossReport report;
};

// Searches for an on-plane auxiliary for a pair of scalar sources. Probes
// the degenerate (rate-zero) auxiliary together with the one-parameter
// family of scalar conditionally independent splits, and returns the
// candidate with the smallest worst-case residual. Never throws on a
// fruitless search; `found` stays false.
PanglossSearch find_pangloss_scalar(const SourceSpec& spec,
                                    const DistortionPair& dist,
                                    double plane_tol = tol::plane,
                                    int grid = 48);

}  // namespace gw
