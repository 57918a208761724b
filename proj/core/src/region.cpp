#include "gw/region.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "gw/errors.hpp"
#include "gw/parallel.hpp"
#include "gw/rng.hpp"
#include "gw/tolerances.hpp"

namespace gw {

void WeightPair::validate() const {
  if (!(a1 >= 0.0 && a1 <= 1.0 && a2 >= 0.0 && a2 <= 1.0 && a1 + a2 >= 1.0)) {
    throw Error("rate weights must lie in [0,1] and sum to at least 1");
  }
}

RatePoint rate_point_from_aux(const SourceSpec& spec, const AuxParam& aux,
                              const DistortionPair& dist) {
  const CondCov cond = cond_cov_from_aux(spec, aux);
  RatePoint pt;
  pt.r0 = mutual_information(spec, cond);
  const WaterfillSolution w1 = conditional_rdf(cond.q1w, dist.d1);
  const WaterfillSolution w2 = conditional_rdf(cond.q2w, dist.d2);
  pt.r1 = w1.rate;
  pt.r2 = w2.rate;
  pt.achieved_d1 = w1.q_e.trace();
  pt.achieved_d2 = w2.q_e.trace();
  pt.aux = aux;
  return pt;
}

double t_objective(const SourceSpec& spec, const AuxParam& aux,
                   const DistortionPair& dist, const WeightPair& weights) {
  weights.validate();
  const CondCov cond = cond_cov_from_aux(spec, aux);
  return mutual_information(spec, cond) +
         weights.a1 * conditional_rdf(cond.q1w, dist.d1).rate +
         weights.a2 * conditional_rdf(cond.q2w, dist.d2).rate;
}

namespace {

struct Stream {
  std::uint64_t seed;
  std::uint64_t k = 0;
  double normal() { return rng::normal_at(seed, k++); }
  double uniform() { return rng::uniform_at(seed, k++); }
};

Matrix random_orthogonal(Index dim, Stream& s) {
  Matrix g(dim, dim);
  for (Index i = 0; i < dim; ++i) {
    for (Index j = 0; j < dim; ++j) g(i, j) = s.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(dim, dim);
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

// Objective over the free cross-covariance (Cov(W) = I). Feasibility is
// a retraction, not a rejection: the conditional spectrum is clipped at a
// small floor, which leaves the function defined everywhere the search
// may step while agreeing with the strict objective on the interior.
class PairObjective {
 public:
  PairObjective(const SourceSpec& spec, const DistortionPair& dist,
                const WeightPair& weights)
      : p1_(spec.p1),
        p2_(spec.p2),
        q_(spec.joint()),
        dist_(dist),
        weights_(weights),
        logdet_q_(log_det_psd(q_)),
        floor_(1e-8 * q_.trace() / static_cast<double>(q_.rows())) {}

  double floor() const { return floor_; }
  const Matrix& q() const { return q_; }

  double operator()(const Matrix& c) const {
    const Matrix qz = symmetrize(q_ - c * c.transpose());
    const SymEig eig = sym_eig(qz);
    const Vector lam = eig.values.cwiseMax(floor_);
    const Matrix clipped =
        symmetrize(eig.vectors * lam.asDiagonal() * eig.vectors.transpose());
    const double mi =
        std::max(0.0, 0.5 * (logdet_q_ - lam.array().log().sum()));
    const double r1 =
        conditional_rdf(clipped.topLeftCorner(p1_, p1_), dist_.d1).rate;
    const double r2 =
        conditional_rdf(clipped.bottomRightCorner(p2_, p2_), dist_.d2).rate;
    return mi + weights_.a1 * r1 + weights_.a2 * r2;
  }

 private:
  Index p1_, p2_;
  Matrix q_;
  DistortionPair dist_;
  WeightPair weights_;
  double logdet_q_;
  double floor_;
};

using ObjectiveFn = std::function<double(const Vector&)>;

double guarded(const ObjectiveFn& f, const Vector& x) {
  const double v = f(x);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

// Compass pattern search: probe +/- step along every coordinate, accept
// improvements greedily, halve the step when a full sweep fails.
void pattern_search(const ObjectiveFn& f, Vector& x, double& fx, double step,
                    double step_tol, int max_sweeps, long& evals) {
  const Index m = x.size();
  for (int sweep = 0; sweep < max_sweeps && step > step_tol; ++sweep) {
    bool improved = false;
    for (Index i = 0; i < m; ++i) {
      for (const double sgn : {1.0, -1.0}) {
        Vector cand = x;
        cand[i] += sgn * step;
        const double fc = guarded(f, cand);
        ++evals;
        if (fc < fx) {
          x.swap(cand);
          fx = fc;
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }
}

// Central-difference gradient descent with backtracking. Polishes the
// pattern-search point; kinks in the objective simply stall the line
// search, which ends the refinement.
void fd_descent(const ObjectiveFn& f, Vector& x, double& fx, double h,
                int max_iters, long& evals, double& gnorm) {
  const Index m = x.size();
  gnorm = 0.0;
  double alpha_seed = 1.0;
  for (int iter = 0; iter < max_iters; ++iter) {
    Vector g(m);
    for (Index i = 0; i < m; ++i) {
      Vector xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (guarded(f, xp) - guarded(f, xm)) / (2.0 * h);
      evals += 2;
    }
    gnorm = g.norm();
    if (!(gnorm > 1e-11)) break;
    double alpha = alpha_seed / gnorm;
    bool moved = false;
    for (int back = 0; back < 40; ++back) {
      Vector cand = x - alpha * g;
      const double fc = guarded(f, cand);
      ++evals;
      if (fc <= fx - 1e-4 * alpha * gnorm * gnorm) {
        x.swap(cand);
        fx = fc;
        alpha_seed = std::min(1.0, 2.0 * alpha * gnorm);
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }
}

struct LocalMin {
  double value = std::numeric_limits<double>::infinity();
  Vector x;
  long evals = 0;
  double gnorm = std::numeric_limits<double>::infinity();
};

// Deterministic multistart winner: smallest value, ties broken by the
// lexicographically smallest parameter vector.
bool better_than(const LocalMin& a, const LocalMin& b) {
  if (a.value != b.value) return a.value < b.value;
  for (Index i = 0; i < std::min(a.x.size(), b.x.size()); ++i) {
    if (a.x[i] != b.x[i]) return a.x[i] < b.x[i];
  }
  return a.x.size() < b.x.size();
}

LocalMin local_minimize(const ObjectiveFn& f, Vector x0, double scale,
                        const OptOptions& opts) {
  LocalMin out;
  out.x = std::move(x0);
  out.value = guarded(f, out.x);
  ++out.evals;
  pattern_search(f, out.x, out.value, 0.15 * scale, opts.pattern_tol * scale,
                 opts.max_pattern_iterations, out.evals);
  fd_descent(f, out.x, out.value, 1e-6 * scale, opts.max_descent_iterations,
             out.evals, out.gnorm);
  return out;
}

// Conditionally independent family: thin SVD of the whitened cross block
// (canonical correlations), with one log-scale knob per kept singular
// value splitting each factor between the two sources. Whitening matters:
// the canonical correlations of a positive definite joint covariance are
// strictly below one, so theta = 0 is always a strictly feasible split,
// whereas per-direction scalings of the raw cross factors can miss the
// feasible set entirely when a marginal is thin along a cross direction.
struct CiFamily {
  Index p1 = 0, p2 = 0, r = 0;
  Matrix u, v;     // p1 x r, p2 x r; carry the marginal square roots
  Vector root_sv;  // sqrt of the kept canonical correlations

  Matrix a1(const Vector& theta) const {
    return u * (root_sv.array() * theta.array().exp()).matrix().asDiagonal();
  }
  Matrix a2(const Vector& theta) const {
    return v *
           (root_sv.array() * (-theta).array().exp()).matrix().asDiagonal();
  }
};

CiFamily make_ci_family(const SourceSpec& spec) {
  CiFamily fam;
  fam.p1 = spec.p1;
  fam.p2 = spec.p2;
  const SymEig e1 = sym_eig(spec.q_x1);
  const SymEig e2 = sym_eig(spec.q_x2);
  // Marginals are positive definite for a validated spec, so the inverse
  // square roots exist.
  const auto half = [](const SymEig& e, double power) {
    return Matrix(e.vectors *
                  e.values.array().pow(power).matrix().asDiagonal() *
                  e.vectors.transpose());
  };
  const Matrix white =
      half(e1, -0.5) * spec.q_x1x2 * half(e2, -0.5);
  Eigen::JacobiSVD<Matrix> svd(white,
                               Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector sv = svd.singularValues();
  const double cutoff = sv.size() ? tol::psd * std::max(sv[0], 1.0) : 0.0;
  Index r = 0;
  while (r < sv.size() && sv[r] > cutoff) ++r;
  fam.r = r;
  fam.u = half(e1, 0.5) * svd.matrixU().leftCols(r);
  fam.v = half(e2, 0.5) * svd.matrixV().leftCols(r);
  fam.root_sv = sv.head(r).cwiseSqrt();
  return fam;
}

struct CiOutcome {
  double value = std::numeric_limits<double>::infinity();
  Vector theta;
  Matrix c;  // stacked [a1; a2], p x r
  long evals = 0;
  double gnorm = 0.0;
  bool feasible = false;
};

// Minimizes the functional inside the conditionally independent family.
// Tracks the best iterate whose blocks are PSD without clipping so a
// clip-active optimum can fall back to a genuinely feasible parameter.
CiOutcome ci_search(const SourceSpec& spec, const DistortionPair& dist,
                    const WeightPair& weights, const OptOptions& opts) {
  const CiFamily fam = make_ci_family(spec);
  const Index p = spec.p1 + spec.p2;
  PairObjective strict_scale(spec, dist, weights);
  const double floor = strict_scale.floor();
  const double logdet_q = log_det_psd(spec.joint());

  CiOutcome out;
  if (fam.r == 0) {
    out.theta = Vector(0);
    out.c = Matrix(p, 0);
    out.value = strict_scale(out.c);
    out.evals = 1;
    out.feasible = true;
    return out;
  }

  const double scale1 = std::max(operator_norm(spec.q_x1), 1.0);
  const double scale2 = std::max(operator_norm(spec.q_x2), 1.0);

  struct StartResult {
    LocalMin local;
    double best_feasible_value = std::numeric_limits<double>::infinity();
    Vector best_feasible_theta;
  };
  std::vector<StartResult> results(std::max(1, opts.multistarts));

  auto run_start = [&](int k) {
    StartResult& res = results[k];
    // Per-start evaluator so the feasible-iterate bookkeeping is local.
    ObjectiveFn f = [&](const Vector& theta) {
      const Matrix a1 = fam.a1(theta);
      const Matrix a2 = fam.a2(theta);
      const SymEig e1 = sym_eig(spec.q_x1 - a1 * a1.transpose());
      const SymEig e2 = sym_eig(spec.q_x2 - a2 * a2.transpose());
      const Vector l1 = e1.values.cwiseMax(floor);
      const Vector l2 = e2.values.cwiseMax(floor);
      const double mi = std::max(
          0.0, 0.5 * (logdet_q - l1.array().log().sum() -
                      l2.array().log().sum()));
      const Matrix q1w = symmetrize(e1.vectors * l1.asDiagonal() *
                                    e1.vectors.transpose());
      const Matrix q2w = symmetrize(e2.vectors * l2.asDiagonal() *
                                    e2.vectors.transpose());
      const double value = mi +
                           weights.a1 * conditional_rdf(q1w, dist.d1).rate +
                           weights.a2 * conditional_rdf(q2w, dist.d2).rate;
      const bool feasible = e1.values.minCoeff() >= -tol::psd * scale1 &&
                            e2.values.minCoeff() >= -tol::psd * scale2;
      if (feasible && value < res.best_feasible_value) {
        res.best_feasible_value = value;
        res.best_feasible_theta = theta;
      }
      return value;
    };
    Vector theta0 = Vector::Zero(fam.r);
    if (k > 0) {
      Stream s{rng::derive_seed(opts.seed, 0x9C100 + k)};
      for (Index i = 0; i < fam.r; ++i) theta0[i] = 0.6 * s.normal();
    }
    res.local = local_minimize(f, std::move(theta0), 1.0, opts);
  };
  parallel_for(static_cast<int>(results.size()), opts.threads, run_start);

  int best = 0;
  int best_feasible = -1;
  for (int k = 0; k < static_cast<int>(results.size()); ++k) {
    out.evals += results[k].local.evals;
    if (better_than(results[k].local, results[best].local)) best = k;
    if (results[k].best_feasible_value <
        (best_feasible < 0 ? std::numeric_limits<double>::infinity()
                           : results[best_feasible].best_feasible_value)) {
      best_feasible = k;
    }
  }

  // Prefer the optimizer's point when its blocks are PSD; otherwise fall
  // back to the best iterate that was.
  Vector theta = results[best].local.x;
  const Matrix a1 = fam.a1(theta);
  const Matrix a2 = fam.a2(theta);
  const bool ok =
      min_eigenvalue(symmetrize(spec.q_x1 - a1 * a1.transpose())) >=
          -tol::psd * scale1 &&
      min_eigenvalue(symmetrize(spec.q_x2 - a2 * a2.transpose())) >=
          -tol::psd * scale2;
  if (ok) {
    out.value = results[best].local.value;
    out.gnorm = results[best].local.gnorm;
  } else if (best_feasible >= 0) {
    theta = results[best_feasible].best_feasible_theta;
    out.value = results[best_feasible].best_feasible_value;
    out.gnorm = std::numeric_limits<double>::infinity();
  } else {
    throw InfeasibleFactorization(
        "no feasible conditionally independent parametrization found");
  }
  out.theta = theta;
  Matrix c(p, fam.r);
  c.topRows(spec.p1) = fam.a1(theta);
  c.bottomRows(spec.p2) = fam.a2(theta);
  out.c = c;
  out.feasible = true;
  return out;
}

Matrix unflatten(const Vector& x, Index rows, Index cols) {
  return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

Vector flatten(const Matrix& m) {
  return Eigen::Map<const Vector>(m.data(), m.size());
}

// Largest s in (0, 1] with Q - s^2 c c' PSD, then c <- s c. Only needed
// when a search ends with the retraction still active.
Matrix snap_feasible(const Matrix& q, Matrix c) {
  const double scale = std::max(operator_norm(q), 1.0);
  auto feasible = [&](const Matrix& cc) {
    return min_eigenvalue(symmetrize(q - cc * cc.transpose())) >=
           -0.5 * tol::psd * scale;
  };
  if (feasible(c)) return c;
  double lo = 0.0, hi = 1.0;
  for (int iter = 0; iter < 60; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (feasible(mid * c) ? lo : hi) = mid;
  }
  return lo * c;
}

OptResult finish_result(const SourceSpec& spec, const DistortionPair& dist,
                        Matrix c_best, double value, long iters,
                        double gnorm) {
  OptResult res;
  res.value = value;
  res.iterations = iters;
  res.kkt_residual = std::isfinite(gnorm)
                         ? gnorm / (1.0 + std::fabs(value))
                         : std::numeric_limits<double>::infinity();
  res.converged = res.kkt_residual <= tol::kkt;
  res.argmin = c_best.cols() == 0
                   ? AuxParam::independent(spec.p1 + spec.p2)
                   : AuxParam::canonical(std::move(c_best));
  res.rate_point = rate_point_from_aux(spec, res.argmin, dist);
  return res;
}

}  // namespace

OptResult minimize_tg(const SourceSpec& spec, const DistortionPair& dist,
                      const WeightPair& weights, const OptOptions& opts) {
  spec.validate();
  weights.validate();
  const Index p = spec.p1 + spec.p2;
  const Index n = opts.n > 0 ? opts.n : std::min(spec.p1, spec.p2);
  const PairObjective obj(spec, dist, weights);
  const double cscale = std::sqrt(std::max(max_eigenvalue(obj.q()), 1e-12));

  // The restricted family provides one warm start; its own search uses
  // the same seed derivation as minimize_tcig, so the free minimum can
  // never land above the restricted one.
  CiOutcome ci;
  bool have_ci = false;
  try {
    ci = ci_search(spec, dist, weights, opts);
    have_ci = ci.c.cols() <= n;
  } catch (const InfeasibleFactorization&) {
    have_ci = false;
  }

  std::vector<Matrix> starts;
  starts.push_back(Matrix::Zero(p, n));
  if (have_ci && ci.c.cols() > 0) {
    Matrix padded = Matrix::Zero(p, n);
    padded.leftCols(ci.c.cols()) = ci.c;
    starts.push_back(std::move(padded));
  }
  const Eigen::LLT<Matrix> llt(obj.q());
  const Matrix q_inv = llt.solve(Matrix::Identity(p, p));
  for (int k = static_cast<int>(starts.size()); k < std::max(2, opts.multistarts); ++k) {
    Stream s{rng::derive_seed(opts.seed, 0x7B0 + static_cast<std::uint64_t>(k))};
    Matrix g(p, n);
    for (Index i = 0; i < p; ++i) {
      for (Index j = 0; j < n; ++j) g(i, j) = s.normal();
    }
    const double lam = max_eigenvalue(symmetrize(g.transpose() * q_inv * g));
    const double tau = 0.25 + 0.65 * s.uniform();
    starts.push_back(g * (tau / std::sqrt(std::max(lam, 1e-300))));
  }

  ObjectiveFn f = [&](const Vector& x) { return obj(unflatten(x, p, n)); };
  std::vector<LocalMin> locals(starts.size());
  parallel_for(static_cast<int>(starts.size()), opts.threads, [&](int k) {
    locals[k] = local_minimize(f, flatten(starts[k]), cscale, opts);
  });

  int best = 0;
  long evals = 0;
  for (int k = 0; k < static_cast<int>(locals.size()); ++k) {
    evals += locals[k].evals;
    if (better_than(locals[k], locals[best])) best = k;
  }
  const Matrix c_best = snap_feasible(obj.q(), unflatten(locals[best].x, p, n));
  return finish_result(spec, dist, c_best, locals[best].value, evals,
                       locals[best].gnorm);
}

OptResult minimize_tcig(const SourceSpec& spec, const DistortionPair& dist,
                        const WeightPair& weights, const OptOptions& opts) {
  spec.validate();
  weights.validate();
  const CiOutcome ci = ci_search(spec, dist, weights, opts);
  if (ci.c.cols() > 0) {
    // Round-trip through the factorization checks so the returned aux is
    // exactly what a caller could have built.
    const Matrix a1 = ci.c.topRows(spec.p1);
    const Matrix a2 = ci.c.bottomRows(spec.p2);
    OptResult res = finish_result(spec, dist, Matrix(), ci.value, ci.evals,
                                  ci.gnorm);
    res.argmin = build_ci_aux(spec, a1, a2);
    res.rate_point = rate_point_from_aux(spec, res.argmin, dist);
    return res;
  }
  return finish_result(spec, dist, ci.c, ci.value, ci.evals, ci.gnorm);
}

RegionSweep enumerate_region(const SourceSpec& spec,
                             const DistortionPair& dist,
                             const RegionOptions& opts) {
  spec.validate();
  const Index p = spec.p1 + spec.p2;
  const Matrix q = spec.joint();
  const Eigen::LLT<Matrix> llt(q);
  const Matrix q_inv = llt.solve(Matrix::Identity(p, p));

  struct Node {
    Index n;
    int rep;
  };
  std::vector<Node> nodes;
  for (Index n = 1; n <= p; ++n) {
    for (int rep = 0; rep < opts.rotations; ++rep) nodes.push_back({n, rep});
  }

  std::vector<std::vector<RatePoint>> per_node(nodes.size());
  std::vector<int> node_skipped(nodes.size(), 0);
  parallel_for(static_cast<int>(nodes.size()), opts.threads, [&](int t) {
    const auto [n, rep] = nodes[t];
    Stream s{rng::derive_seed(opts.seed,
                              static_cast<std::uint64_t>(n) * 0x10001 +
                                  static_cast<std::uint64_t>(rep))};
    const Matrix u = random_orthogonal(p, s);
    const Matrix v = random_orthogonal(n, s);
    Vector d(n);
    for (Index i = 0; i < n; ++i) d[i] = 0.3 + 0.7 * s.uniform();
    const Matrix c0 = u.leftCols(n) * d.asDiagonal() * v.transpose();
    const double lam =
        max_eigenvalue(symmetrize(c0.transpose() * q_inv * c0));
    const double s_max = 1.0 / std::sqrt(std::max(lam, 1e-300));
    for (int k = 0; k < opts.scales; ++k) {
      const double scale = 0.97 * s_max * std::pow(0.72, k);
      try {
        per_node[t].push_back(rate_point_from_aux(
            spec, AuxParam::canonical(scale * c0), dist));
      } catch (const Error&) {
        ++node_skipped[t];
      }
    }
  });

  RegionSweep sweep;
  // The no-common-message corner is always part of the cloud.
  sweep.points.push_back(
      rate_point_from_aux(spec, AuxParam::independent(p), dist));
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    sweep.skipped += node_skipped[t];
    for (RatePoint& pt : per_node[t]) sweep.points.push_back(std::move(pt));
  }
  return sweep;
}

OuterBoundSlack check_outer_bounds(const RatePoint& point, double joint_rate,
                                   double marginal_rate1,
                                   double marginal_rate2) {
  OuterBoundSlack slack;
  slack.s_sum = point.r0 + point.r1 + point.r2 - joint_rate;
  slack.s1 = point.r0 + point.r1 - marginal_rate1;
  slack.s2 = point.r0 + point.r2 - marginal_rate2;
  return slack;
}

OuterBoundSlack check_outer_bounds(const RatePoint& point,
                                   const SourceSpec& spec,
                                   const DistortionPair& dist) {
  return check_outer_bounds(
      point, joint_rdf(spec, dist).rate,
      marginal_rdf(spec.q_x1, dist.d1).rate,
      marginal_rdf(spec.q_x2, dist.d2).rate);
}

}  // namespace gw
