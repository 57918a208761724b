#pragma once

#include <vector>

#include "gw/gaussian.hpp"

namespace gw {

struct DistortionPair {
  double d1 = 0.0;
  double d2 = 0.0;
};

// Result of reverse water-filling a single covariance against a total
// square-error budget.
struct WaterfillSolution {
  double rate = 0.0;       // nats
  Matrix q_e;              // optimal error covariance, same eigenbasis as input
  double water_level = 0.0;
  std::vector<Index> active_set;  // indices (into `eigenvalues`) kept above the level
  Vector eigenvalues;      // input spectrum, ascending
  Vector allocations;      // per-eigenvalue distortion, min(eigenvalue, level)
};

// Rate-distortion function of a Gaussian vector with covariance `q_cond`
// (interpreted as a covariance *given* whatever side information produced
// it) under total square-error budget `delta`. Zero eigenvalues carry no
// rate and no distortion; the water level is found by bisection and then
// solved exactly on the identified active set, so trace(q_e) matches
// min(delta, trace(q_cond)) to machine precision.
WaterfillSolution conditional_rdf(const Matrix& q_cond, double delta);

// Same computation for an unconditional (strictly positive definite)
// source covariance.
WaterfillSolution marginal_rdf(const Matrix& q, double delta);

struct JointRdfOptions {
  int max_iterations = 10000;  // total Newton steps across the barrier path
  double opt_tol = 1e-8;       // relative objective-change tolerance
  double kkt_tol = 1e-6;       // acceptable optimality residual
};

struct JointRdfSolution {
  double rate = 0.0;   // nats
  Matrix q_e;          // optimal joint error covariance
  int iterations = 0;
  double kkt_residual = 0.0;
};

// R(d1, d2) for the source pair: minimize (1/2) ln^+ det(Q)/det(E) over
// error covariances 0 < E <= Q whose diagonal blocks meet the per-source
// trace budgets. Solved as a log-det barrier problem with Newton steps on
// the central path. Throws InvalidDistortion for non-positive budgets and
// NonConvergence if the iteration budget runs out with the residual above
// kkt_tol.
JointRdfSolution joint_rdf(const SourceSpec& spec, const DistortionPair& dist,
                           const JointRdfOptions& opts = {});

// Same program for an arbitrary strictly positive definite covariance
// split at `p1` (used for conditional versions of the joint function).
JointRdfSolution joint_rdf_of(const Matrix& q_joint, Index p1,
                              const DistortionPair& dist,
                              const JointRdfOptions& opts = {});

}  // namespace gw
