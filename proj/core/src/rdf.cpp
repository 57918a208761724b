#include "gw/rdf.hpp"

#include <cmath>
#include <limits>

#include "gw/errors.hpp"
#include "gw/tolerances.hpp"

namespace gw {

namespace {

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidDistortion("distortion budget must be positive and finite");
  }
}

WaterfillSolution waterfill(const Matrix& q, double delta) {
  check_delta(delta);
  require_symmetric(q, "covariance");
  const SymEig eig = sym_eig(q);
  const Index m = eig.values.size();
  const double top = eig.values.size() ? eig.values.maxCoeff() : 0.0;
  const double cutoff = tol::psd * std::max(top, 1.0);
  if (eig.values.size() && eig.values.minCoeff() < -cutoff) {
    throw InfeasibleAux("covariance handed to the water-filler is indefinite");
  }

  // Zero out spectral dust so rank-deficient directions carry neither
  // rate nor distortion.
  Vector lam = eig.values;
  for (Index j = 0; j < m; ++j) {
    if (lam[j] < cutoff) lam[j] = 0.0;
  }

  WaterfillSolution sol;
  sol.eigenvalues = lam;
  sol.allocations = Vector::Zero(m);

  const double total = lam.sum();
  if (delta >= total) {
    // Budget swallows the whole source: zero rate, keep the covariance.
    sol.rate = 0.0;
    sol.q_e = symmetrize(q);
    sol.water_level = top;
    sol.allocations = lam;
    return sol;
  }

  // Bracket the water level by bisection, then solve the level exactly
  // on the active set the bracket identifies.
  double lo = 0.0, hi = top;
  for (int iter = 0; iter < 200 && hi - lo > tol::water; ++iter) {
    const double mid = 0.5 * (lo + hi);
    double filled = 0.0;
    for (Index j = 0; j < m; ++j) filled += std::min(lam[j], mid);
    (filled < delta ? lo : hi) = mid;
  }
  double theta = 0.5 * (lo + hi);
  for (int pass = 0; pass < static_cast<int>(m) + 1; ++pass) {
    double clamped = 0.0;
    Index active = 0;
    for (Index j = 0; j < m; ++j) {
      if (lam[j] > theta) {
        ++active;
      } else {
        clamped += lam[j];
      }
    }
    if (active == 0) break;  // cannot happen while delta < total
    const double exact = (delta - clamped) / static_cast<double>(active);
    if (exact == theta) break;
    theta = exact;
  }

  double rate = 0.0;
  for (Index j = 0; j < m; ++j) {
    if (lam[j] > theta) {
      sol.active_set.push_back(j);
      sol.allocations[j] = theta;
      rate += 0.5 * std::log(lam[j] / theta);
    } else {
      sol.allocations[j] = lam[j];
    }
  }
  sol.rate = rate;
  sol.water_level = theta;
  sol.q_e = symmetrize(eig.vectors * sol.allocations.asDiagonal() *
                       eig.vectors.transpose());
  return sol;
}

}  // namespace

WaterfillSolution conditional_rdf(const Matrix& q_cond, double delta) {
  return waterfill(q_cond, delta);
}

WaterfillSolution marginal_rdf(const Matrix& q, double delta) {
  require_symmetric(q, "covariance");
  const double scale = std::max(max_eigenvalue(q), 1.0);
  if (min_eigenvalue(q) <= tol::psd * scale) {
    throw SingularMatrix("marginal covariance must be positive definite");
  }
  return waterfill(q, delta);
}

namespace {

// Symmetric-matrix vectorization used by the barrier solver: coordinates
// run over i <= j with off-diagonal entries scaled by sqrt(2), making the
// basis orthonormal under the Frobenius inner product.
struct SymBasis {
  Index p;
  std::vector<std::pair<Index, Index>> coords;

  explicit SymBasis(Index dim) : p(dim) {
    coords.reserve(dim * (dim + 1) / 2);
    for (Index i = 0; i < dim; ++i) {
      for (Index j = i; j < dim; ++j) coords.emplace_back(i, j);
    }
  }

  Index size() const { return static_cast<Index>(coords.size()); }

  Vector pack(const Matrix& m) const {
    static const double rt2 = std::sqrt(2.0);
    Vector v(size());
    for (Index a = 0; a < size(); ++a) {
      const auto [i, j] = coords[a];
      v[a] = i == j ? m(i, i) : rt2 * m(i, j);
    }
    return v;
  }

  Matrix unpack(const Vector& v) const {
    static const double inv_rt2 = 1.0 / std::sqrt(2.0);
    Matrix m(p, p);
    for (Index a = 0; a < size(); ++a) {
      const auto [i, j] = coords[a];
      if (i == j) {
        m(i, i) = v[a];
      } else {
        m(i, j) = m(j, i) = inv_rt2 * v[a];
      }
    }
    return m;
  }
};

struct BarrierState {
  double s1 = 0.0, s2 = 0.0;   // trace slacks
  double logdet_e = 0.0, logdet_s = 0.0;
  Matrix e_inv, s_inv;
  bool feasible = false;
};

BarrierState evaluate_state(const Matrix& q, Index p1, const Matrix& e,
                            const DistortionPair& dist, bool need_inverses) {
  BarrierState st;
  const Index p = q.rows();
  st.s1 = dist.d1 - e.topLeftCorner(p1, p1).trace();
  st.s2 = dist.d2 - e.bottomRightCorner(p - p1, p - p1).trace();
  if (st.s1 <= 0.0 || st.s2 <= 0.0) return st;
  const Matrix s = symmetrize(q - e);
  Eigen::LLT<Matrix> llt_e(e);
  Eigen::LLT<Matrix> llt_s(s);
  if (llt_e.info() != Eigen::Success || llt_s.info() != Eigen::Success) {
    return st;
  }
  st.logdet_e = 2.0 * llt_e.matrixLLT().diagonal().array().log().sum();
  st.logdet_s = 2.0 * llt_s.matrixLLT().diagonal().array().log().sum();
  if (need_inverses) {
    st.e_inv = symmetrize(llt_e.solve(Matrix::Identity(p, p)));
    st.s_inv = symmetrize(llt_s.solve(Matrix::Identity(p, p)));
  }
  st.feasible = true;
  return st;
}

double barrier_value(const BarrierState& st, double t) {
  return -t * st.logdet_e - st.logdet_s - std::log(st.s1) - std::log(st.s2);
}

// Dense Hessian of the barrier in the orthonormal symmetric basis:
//   t * (M (.) M) + N (.) N + rank-one terms from the two trace slacks,
// where M = E^-1 and N = (Q - E)^-1.
Matrix barrier_hessian(const SymBasis& basis, const Matrix& m_inv,
                       const Matrix& n_inv, double t, Index p1, double s1,
                       double s2) {
  const Index dim = basis.size();
  Matrix h(dim, dim);
  for (Index a = 0; a < dim; ++a) {
    const auto [i, j] = basis.coords[a];
    const double beta_a = i == j ? 0.5 : 1.0 / std::sqrt(2.0);
    for (Index b = a; b < dim; ++b) {
      const auto [k, l] = basis.coords[b];
      const double beta_b = k == l ? 0.5 : 1.0 / std::sqrt(2.0);
      const double mm = m_inv(i, k) * m_inv(j, l) + m_inv(i, l) * m_inv(j, k);
      const double nn = n_inv(i, k) * n_inv(j, l) + n_inv(i, l) * n_inv(j, k);
      h(a, b) = h(b, a) = 2.0 * beta_a * beta_b * (t * mm + nn);
    }
  }
  const double nu1 = 1.0 / s1, nu2 = 1.0 / s2;
  for (Index a = 0; a < dim; ++a) {
    const auto [i, j] = basis.coords[a];
    if (i != j) continue;
    for (Index b = 0; b < dim; ++b) {
      const auto [k, l] = basis.coords[b];
      if (k != l) continue;
      if (i < p1 && k < p1) h(a, b) += nu1 * nu1;
      if (i >= p1 && k >= p1) h(a, b) += nu2 * nu2;
    }
  }
  return h;
}

}  // namespace

JointRdfSolution joint_rdf_of(const Matrix& q_joint, Index p1,
                              const DistortionPair& dist,
                              const JointRdfOptions& opts) {
  check_delta(dist.d1);
  check_delta(dist.d2);
  require_symmetric(q_joint, "joint covariance");
  const Index p = q_joint.rows();
  if (p1 < 1 || p1 >= p) {
    throw DimensionMismatch("block split must leave both blocks non-empty");
  }
  if (p > 96) {
    throw Error("joint rate solver supports at most 96 combined dimensions");
  }
  const Matrix q = symmetrize(q_joint);
  const double scale = std::max(max_eigenvalue(q), 1.0);
  if (min_eigenvalue(q) <= tol::psd * scale) {
    throw SingularMatrix("joint covariance must be positive definite");
  }
  const Index p2 = p - p1;
  const double tr1 = q.topLeftCorner(p1, p1).trace();
  const double tr2 = q.bottomRightCorner(p2, p2).trace();
  const double logdet_q = log_det_psd(q);

  JointRdfSolution sol;
  if (dist.d1 >= tr1 && dist.d2 >= tr2) {
    // Both budgets cover the sources outright; E = Q is optimal.
    sol.rate = 0.0;
    sol.q_e = q;
    return sol;
  }

  // Interior start: shrink Q until strictly inside every constraint.
  const double gamma =
      0.95 * std::min({1.0, (dist.d1 + dist.d2) / (tr1 + tr2), dist.d1 / tr1,
                       dist.d2 / tr2});
  Matrix e = gamma * q;

  const SymBasis basis(p);
  const double gap_target = 1e-9;
  double t = 1.0;
  const double mu = 10.0;
  int iterations = 0;
  double prev_objective = std::numeric_limits<double>::infinity();
  bool converged = false;

  // Near the end of the path the trace slacks shrink like 1/t and the
  // Hessian conditioning degrades, so each centering also gets a fixed
  // step budget and a stagnation guard on the barrier value.
  const int round_cap = 40 + 10 * static_cast<int>(p);
  while (iterations < opts.max_iterations) {
    // Center at the current barrier weight.
    for (int round_iters = 0;
         round_iters < round_cap && iterations < opts.max_iterations;
         ++round_iters, ++iterations) {
      BarrierState st = evaluate_state(q, p1, e, dist, true);
      if (!st.feasible) {
        throw NonConvergence("barrier iterate left the feasible set");
      }
      Matrix grad_mat = -t * st.e_inv + st.s_inv;
      grad_mat.diagonal().head(p1).array() += 1.0 / st.s1;
      grad_mat.diagonal().tail(p2).array() += 1.0 / st.s2;
      const Vector g = basis.pack(grad_mat);
      const Matrix h = barrier_hessian(basis, st.e_inv, st.s_inv, t, p1,
                                       st.s1, st.s2);
      Eigen::LDLT<Matrix> ldlt(h);
      Vector delta = ldlt.solve(-g);
      const double decrement_sq = -g.dot(delta);
      if (!(decrement_sq > 0.0)) break;  // numerically centered
      if (0.5 * decrement_sq < 1e-13) break;
      const Matrix step = basis.unpack(delta);
      const double phi0 = barrier_value(st, t);
      double alpha = 1.0;
      double phi_new = phi0;
      bool moved = false;
      for (int back = 0; back < 60; ++back) {
        const Matrix cand = symmetrize(e + alpha * step);
        BarrierState cst = evaluate_state(q, p1, cand, dist, false);
        if (cst.feasible) {
          phi_new = barrier_value(cst, t);
          if (phi_new <= phi0 - 0.25 * alpha * decrement_sq) {
            e = cand;
            moved = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!moved) break;
      if (phi0 - phi_new <= 1e-12 * (1.0 + std::fabs(phi_new))) {
        break;  // progress below floating-point resolution
      }
    }

    const BarrierState st = evaluate_state(q, p1, e, dist, false);
    const double objective = logdet_q - st.logdet_e;
    const double gap = (static_cast<double>(p) + 2.0) / t;
    const bool small_change =
        std::fabs(prev_objective - objective) <=
        opts.opt_tol * std::max(1.0, std::fabs(objective));
    prev_objective = objective;
    if (gap <= gap_target && small_change) {
      converged = true;
      break;
    }
    if (iterations >= opts.max_iterations) break;
    t *= mu;
  }

  const BarrierState st = evaluate_state(q, p1, e, dist, true);
  // Stationarity of the centered condition E^-1 = (S^-1 + dual diag) / t,
  // plus the duality gap still open at the final barrier weight.
  Matrix stat = st.s_inv;
  stat.diagonal().head(p1).array() += 1.0 / st.s1;
  stat.diagonal().tail(p2).array() += 1.0 / st.s2;
  stat /= t;
  stat -= st.e_inv;
  const double residual =
      (static_cast<double>(p) + 2.0) / t + stat.norm() / (1.0 + st.e_inv.norm());
  sol.iterations = iterations;
  sol.kkt_residual = residual;
  if (!converged && residual > opts.kkt_tol) {
    throw NonConvergence("joint rate solver exhausted its iteration budget");
  }
  sol.rate = std::max(0.0, 0.5 * (logdet_q - st.logdet_e));
  sol.q_e = symmetrize(e);
  return sol;
}

JointRdfSolution joint_rdf(const SourceSpec& spec, const DistortionPair& dist,
                           const JointRdfOptions& opts) {
  spec.validate();
  return joint_rdf_of(spec.joint(), spec.p1, dist, opts);
}

}  // namespace gw
