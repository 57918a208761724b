#pragma once

#include <cstdint>
#include <vector>

#include "gw/rdf.hpp"
#include "gw/wchannel.hpp"

namespace gw {

// Weights on the two private rates. Each lies in [0, 1] and together they
// must cover at least one full rate, which is the slice of weight space
// where the weighted functional traces the region's lower boundary.
struct WeightPair {
  double a1 = 1.0;
  double a2 = 1.0;

  void validate() const;  // throws Error outside the admissible set
};

// One achievable operating point: common rate r0 = I(X1, X2; W) and the
// two conditional coding rates, plus the distortions actually achieved by
// the error covariances behind r1 and r2.
struct RatePoint {
  double r0 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
  double achieved_d1 = 0.0;
  double achieved_d2 = 0.0;
  AuxParam aux;
};

// The rate triple produced by a given auxiliary at the given budgets.
RatePoint rate_point_from_aux(const SourceSpec& spec, const AuxParam& aux,
                              const DistortionPair& dist);

// Common-rate functional: I(X1, X2; W) plus the weighted conditional
// rate-distortion values. Validates the auxiliary strictly (no interior
// retraction), so infeasible parameters throw InfeasibleAux.
double t_objective(const SourceSpec& spec, const AuxParam& aux,
                   const DistortionPair& dist, const WeightPair& weights);

struct OptOptions {
  Index n = -1;         // auxiliary dimension; -1 means min(p1, p2)
  int multistarts = 16;
  std::uint64_t seed = 0;
  int max_pattern_iterations = 600;
  int max_descent_iterations = 120;
  double pattern_tol = 1e-7;  // relative step size where the search stops
  int threads = 0;            // 0 = GW_THREADS / hardware
};

struct OptResult {
  double value = 0.0;
  AuxParam argmin;
  RatePoint rate_point;
  long iterations = 0;  // objective evaluations spent across all starts
  bool converged = false;
  // Scaled norm of the finite-difference gradient at the argmin; the
  // converged flag is set exactly when this is at or below tol::kkt.
  double kkt_residual = 0.0;
};

// Minimizes t_objective over auxiliaries with Cov(W) = I_n and a free
// cross-covariance. Derivative-free pattern search from several seeded
// starts (always including c = 0 and the best conditionally-independent
// parametrization), refined by finite-difference descent; feasibility is
// kept by clipping the conditional spectrum at a small floor during the
// search. Returns the best local optimum found.
OptResult minimize_tg(const SourceSpec& spec, const DistortionPair& dist,
                      const WeightPair& weights, const OptOptions& opts = {});

// Same functional restricted to auxiliaries that make the sources
// conditionally independent, searched over per-singular-value scalings of
// the cross-covariance factorization. Never below minimize_tg for the
// same options, since the restricted family embeds in the free one.
OptResult minimize_tcig(const SourceSpec& spec, const DistortionPair& dist,
                        const WeightPair& weights, const OptOptions& opts = {});

struct RegionOptions {
  int rotations = 6;  // random direction matrices per auxiliary dimension
  int scales = 10;    // geometric scale steps per direction
  std::uint64_t seed = 0;
  int threads = 0;
};

struct RegionSweep {
  std::vector<RatePoint> points;
  int skipped = 0;  // design nodes dropped as numerically infeasible
};

// Deterministic point-cloud sweep of achievable triples: for every
// auxiliary dimension n up to p1 + p2, seeded random rotation pairs give
// direction matrices, each swept over a geometric grid of feasible
// scales. The degenerate auxiliary (all rate in the private branches) is
// always included. Same spec, budgets and seed give the same points.
RegionSweep enumerate_region(const SourceSpec& spec,
                             const DistortionPair& dist,
                             const RegionOptions& opts = {});

// Slack of the three supporting inequalities at a rate triple: the sum
// rate against the joint rate-distortion value, and each common+private
// pair against the corresponding marginal. Nonnegative (to tolerance)
// for genuinely achievable points.
struct OuterBoundSlack {
  double s_sum = 0.0;
  double s1 = 0.0;
  double s2 = 0.0;
};

OuterBoundSlack check_outer_bounds(const RatePoint& point,
                                   const SourceSpec& spec,
                                   const DistortionPair& dist);

// Batch-friendly variant with the three reference rates precomputed.
OuterBoundSlack check_outer_bounds(const RatePoint& point, double joint_rate,
                                   double marginal_rate1,
                                   double marginal_rate2);

}  // namespace gw
