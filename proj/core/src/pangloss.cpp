#include "gw/pangloss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "gw/errors.hpp"

namespace gw {

namespace {

double block_scale(const Matrix& q) {
  return std::max(operator_norm(q), 1.0);
}

}  // namespace

PanglossReport pangloss_check(const SourceSpec& spec, const AuxParam& aux,
                              const TestChannel& tc1, const TestChannel& tc2,
                              const DistortionPair& dist, double joint_rate,
                              double plane_tol) {
  const Index n = aux.n;
  const Index p1 = spec.p1;
  const Index p2 = spec.p2;
  const Index p = p1 + p2;

  const CondCov cond = cond_cov_from_aux(spec, aux);
  PanglossReport rep;
  rep.joint_rate = joint_rate;
  rep.r0 = mutual_information(spec, cond);

  const WaterfillSolution w1 = conditional_rdf(cond.q1w, dist.d1);
  const WaterfillSolution w2 = conditional_rdf(cond.q2w, dist.d2);
  rep.r1 = w1.rate;
  rep.r2 = w2.rate;
  rep.achieved_d1 = w1.q_e.trace();
  rep.achieved_d2 = w2.q_e.trace();
  rep.sum_rate_gap = rep.r0 + rep.r1 + rep.r2 - joint_rate;

  const Matrix sys = system_covariance(spec, aux, &tc1, &tc2);

  const Index h1 = n + p;       // offset of the first reconstruction
  const Index h2 = n + p + p1;  // offset of the second

  // Conditional cross-covariance of the reconstructions given W.
  const Matrix q_w_pinv = pinv_psd(sys.topLeftCorner(n, n));
  const Matrix cross =
      sys.block(h1, h2, p1, p2) -
      sys.block(h1, 0, p1, n) * q_w_pinv * sys.block(0, h2, n, p2);

  // Second-moment Markov check: the part of Cov(X, W) not captured by
  // projecting W onto the reconstructions.
  const Matrix q_hat = sys.block(h1, h1, p, p);
  const Matrix markov = sys.block(n, 0, p, n) -
                        sys.block(n, h1, p, p) * pinv_psd(q_hat) *
                            sys.block(h1, 0, p, n);

  // Residuals are dimensionless, relative to the largest block norm of
  // the assembled system.
  const double scale =
      std::max(block_scale(spec.joint()), block_scale(aux.q_w));
  rep.ci_residual = operator_norm(cross) / scale;
  rep.markov_residual = operator_norm(markov) / scale;
  rep.on_plane = std::abs(rep.sum_rate_gap) <= plane_tol &&
                 rep.ci_residual <= plane_tol &&
                 rep.markov_residual <= plane_tol;
  return rep;
}

PanglossReport pangloss_check_given(const SourceSpec& spec,
                                    const AuxParam& aux,
                                    const DistortionPair& dist,
                                    double joint_rate, double plane_tol) {
  const CondCov cond = cond_cov_from_aux(spec, aux);
  const WaterfillSolution w1 = conditional_rdf(cond.q1w, dist.d1);
  const WaterfillSolution w2 = conditional_rdf(cond.q2w, dist.d2);
  const TestChannel tc1 =
      build_test_channel(cond.q1w, w1.q_e, aux.c.topRows(spec.p1), aux.q_w);
  const TestChannel tc2 = build_test_channel(
      cond.q2w, w2.q_e, aux.c.bottomRows(spec.p2), aux.q_w);
  return pangloss_check(spec, aux, tc1, tc2, dist, joint_rate, plane_tol);
}

PanglossReport pangloss_check(const SourceSpec& spec, const AuxParam& aux,
                              const DistortionPair& dist, double plane_tol) {
  return pangloss_check_given(spec, aux, dist, joint_rdf(spec, dist).rate,
                              plane_tol);
}

PanglossSearch find_pangloss_scalar(const SourceSpec& spec,
                                    const DistortionPair& dist,
                                    double plane_tol, int grid) {
  spec.validate();
  if (spec.p1 != 1 || spec.p2 != 1) {
    throw DimensionMismatch("scalar on-plane search requires 1x1 sources");
  }
  const double q1 = spec.q_x1(0, 0);
  const double q2 = spec.q_x2(0, 0);
  const double cov = spec.q_x1x2(0, 0);
  const double sigma1 = std::sqrt(q1);
  const double sigma2 = std::sqrt(q2);
  const double joint_rate = joint_rdf(spec, dist).rate;

  std::vector<AuxParam> candidates;
  candidates.push_back(AuxParam::independent(2));

  const double cov_floor = tol::psd * std::max({q1, q2, 1.0});
  if (std::abs(cov) > cov_floor) {
    // One-parameter conditionally independent family: Cov(X1, W) = s,
    // Cov(X2, W) = cov / s, feasible on an open interval.
    const double lo = std::abs(cov) / sigma2;
    const double hi = sigma1;
    auto push_s = [&](double s) {
      if (!(s > lo && s < hi)) return;
      Matrix c(2, 1);
      c << s, cov / s;
      candidates.push_back(AuxParam::canonical(std::move(c)));
    };

    // Sub-interval where neither private branch is rate-clamped; any
    // point of it attains the plane when the budgets allow it at all.
    double un_lo = lo, un_hi = hi;
    if (q1 > dist.d1) un_hi = std::min(un_hi, std::sqrt(q1 - dist.d1));
    if (q2 > dist.d2 && std::abs(cov) > 0.0) {
      un_lo = std::max(un_lo, std::abs(cov) / std::sqrt(q2 - dist.d2));
    }
    if (un_lo < un_hi) {
      push_s(std::sqrt(un_lo * un_hi));
      push_s(0.75 * un_lo + 0.25 * un_hi);
      push_s(0.25 * un_lo + 0.75 * un_hi);
    }
    // Split that moves the entire dependence into the common message.
    push_s(std::abs(cov) / sigma2 * (1.0 + 1e-9));
    push_s(sigma1 * std::abs(cov) / (sigma1 * sigma2));
    const double margin = 1e-7;
    for (int k = 0; k < grid; ++k) {
      const double tau = (k + 0.5) / grid;
      push_s(lo * (1.0 + margin) *
             std::pow(hi * (1.0 - margin) / (lo * (1.0 + margin)), tau));
    }
  }

  PanglossSearch best;
  double best_score = std::numeric_limits<double>::infinity();
  for (const AuxParam& aux : candidates) {
    PanglossReport rep;
    try {
      rep = pangloss_check_given(spec, aux, dist, joint_rate, plane_tol);
    } catch (const Error&) {
      continue;  // numerically degenerate endpoint; skip it
    }
    const double score = std::max(
        {std::abs(rep.sum_rate_gap), rep.ci_residual, rep.markov_residual});
    if (score < best_score) {
      best_score = score;
      best.aux = aux;
      best.report = rep;
      best.found = rep.on_plane;
    }
  }
  return best;
}

}  // namespace gw
