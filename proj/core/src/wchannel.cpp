#include "gw/wchannel.hpp"

#include <cmath>
#include <utility>
#include <vector>

#include "gw/errors.hpp"
#include "gw/tolerances.hpp"

namespace gw {

namespace {

void check_aux_shapes(const SourceSpec& spec, const AuxParam& aux) {
  if (aux.n < 0 || aux.q_w.rows() != aux.n || aux.q_w.cols() != aux.n ||
      aux.c.rows() != spec.p1 + spec.p2 || aux.c.cols() != aux.n) {
    throw DimensionMismatch("auxiliary parameter shapes disagree with the source");
  }
  if (aux.n > 0) {
    require_symmetric(aux.q_w, "Cov(W)");
    if (!is_psd(aux.q_w)) {
      throw InfeasibleAux("Cov(W) must be positive semidefinite");
    }
  }
}

// Conditional covariance of the pair given W, with feasibility checks.
Matrix conditional_of_pair(const SourceSpec& spec, const AuxParam& aux) {
  check_aux_shapes(spec, aux);
  const Matrix q = spec.joint();
  if (aux.n == 0) return q;
  const Matrix w_pinv = pinv_psd(aux.q_w);
  // A cross-covariance outside the range of Cov(W) cannot come from any
  // joint distribution.
  const double c_scale = std::max(aux.c.norm(), 1.0);
  if ((aux.c - aux.c * w_pinv * aux.q_w).norm() > tol::fp * c_scale) {
    throw InfeasibleAux("cross-covariance leaves the range of Cov(W)");
  }
  const Matrix q_z = symmetrize(q - aux.c * w_pinv * aux.c.transpose());
  const double scale = std::max(operator_norm(q), 1.0);
  if (min_eigenvalue(q_z) < -tol::psd * scale) {
    throw InfeasibleAux("auxiliary parameters leave the pair covariance indefinite");
  }
  return q_z;
}

}  // namespace

AuxParam AuxParam::independent(Index p_total) {
  AuxParam aux;
  aux.n = 0;
  aux.q_w = Matrix(0, 0);
  aux.c = Matrix(p_total, 0);
  return aux;
}

AuxParam AuxParam::canonical(Matrix cross) {
  AuxParam aux;
  aux.n = cross.cols();
  aux.q_w = Matrix::Identity(aux.n, aux.n);
  aux.c = std::move(cross);
  return aux;
}

CondCov cond_cov_from_aux(const SourceSpec& spec, const AuxParam& aux) {
  return CondCov::from_joint(conditional_of_pair(spec, aux), spec.p1, spec.p2);
}

JointRealization build_joint_realization(const SourceSpec& spec,
                                         const AuxParam& aux) {
  const Matrix q_z = conditional_of_pair(spec, aux);
  JointRealization real;
  real.gain = aux.c * pinv_psd(aux.q_w);
  real.q_z = q_z;
  real.q_w = aux.q_w;
  return real;
}

AuxParam build_ci_aux(const SourceSpec& spec, const Matrix& a1,
                      const Matrix& a2) {
  if (a1.rows() != spec.p1 || a2.rows() != spec.p2 ||
      a1.cols() != a2.cols()) {
    throw DimensionMismatch("factor shapes disagree with the source");
  }
  const double cross_scale = std::max(spec.q_x1x2.norm(), 1.0);
  if ((a1 * a2.transpose() - spec.q_x1x2).norm() > tol::fp * cross_scale) {
    throw InfeasibleFactorization(
        "factors do not reproduce the cross-covariance");
  }
  const Matrix r1 = symmetrize(spec.q_x1 - a1 * a1.transpose());
  const Matrix r2 = symmetrize(spec.q_x2 - a2 * a2.transpose());
  const double s1 = std::max(operator_norm(spec.q_x1), 1.0);
  const double s2 = std::max(operator_norm(spec.q_x2), 1.0);
  if (min_eigenvalue(r1) < -tol::psd * s1 ||
      min_eigenvalue(r2) < -tol::psd * s2) {
    throw InfeasibleFactorization(
        "factors leave a conditional block indefinite");
  }
  Matrix c(spec.p1 + spec.p2, a1.cols());
  c.topRows(spec.p1) = a1;
  c.bottomRows(spec.p2) = a2;
  return AuxParam::canonical(std::move(c));
}

TestChannel build_test_channel(const Matrix& q_cond, const Matrix& q_e,
                               const Matrix& q_xw, const Matrix& q_w) {
  require_symmetric(q_cond, "conditional covariance");
  require_symmetric(q_e, "error covariance");
  const Index p = q_cond.rows();
  if (q_e.rows() != p || q_xw.rows() != p || q_xw.cols() != q_w.rows() ||
      q_w.rows() != q_w.cols()) {
    throw DimensionMismatch("test-channel input shapes disagree");
  }
  const double cond_scale = std::max(q_cond.norm(), 1.0);
  const double commutator =
      (q_e * q_cond - q_cond * q_e).norm() / cond_scale;
  if (commutator > tol::commute) {
    throw IncompatibleErrorCov(
        "error covariance does not commute with the conditional covariance");
  }
  const double scale = std::max(operator_norm(q_cond), 1.0);
  if (min_eigenvalue(q_e) < -tol::psd * scale ||
      min_eigenvalue(symmetrize(q_cond - q_e)) < -tol::psd * scale) {
    throw IncompatibleErrorCov(
        "error covariance must sit between 0 and the conditional covariance");
  }
  TestChannel tc;
  // In the shared eigenbasis h = 1 - d/lambda per mode; the pseudo-inverse
  // leaves h = 0 on the null space of the conditional covariance, so
  // deterministic directions are reproduced through the shift alone.
  tc.h = symmetrize((q_cond - q_e) * pinv_psd(q_cond));
  tc.shift = (Matrix::Identity(p, p) - tc.h) * q_xw * pinv_psd(q_w);
  tc.q_v = symmetrize(tc.h * q_cond - tc.h * q_cond * tc.h.transpose());
  tc.q_e = symmetrize(q_e);
  return tc;
}

TestChannel test_channel_for_source(const SourceSpec& spec,
                                    const AuxParam& aux, int source,
                                    double delta) {
  if (source != 1 && source != 2) {
    throw DimensionMismatch("source selector must be 1 or 2");
  }
  const CondCov cond = cond_cov_from_aux(spec, aux);
  const Matrix& q_cond = source == 1 ? cond.q1w : cond.q2w;
  const Matrix q_xw = source == 1 ? aux.c.topRows(spec.p1)
                                  : aux.c.bottomRows(spec.p2);
  const WaterfillSolution wf = conditional_rdf(q_cond, delta);
  return build_test_channel(q_cond, wf.q_e, q_xw, aux.q_w);
}

Matrix system_covariance(const SourceSpec& spec, const AuxParam& aux,
                         const TestChannel* tc1, const TestChannel* tc2) {
  check_aux_shapes(spec, aux);
  const Index n = aux.n;
  const Index p1 = spec.p1, p2 = spec.p2, p = p1 + p2;
  const Index dim = n + p + (tc1 ? p1 : 0) + (tc2 ? p2 : 0);
  const Matrix q = spec.joint();

  Matrix full = Matrix::Zero(dim, dim);
  full.topLeftCorner(n, n) = aux.q_w;
  full.block(n, n, p, p) = q;
  full.block(n, 0, p, n) = aux.c;
  full.block(0, n, n, p) = aux.c.transpose();

  struct ChannelSlot {
    const TestChannel* tc;
    Index row;      // first row of this channel's block in `full`
    Index src_off;  // offset of its source inside the stacked pair
    Index dim;
  };
  std::vector<ChannelSlot> slots;
  Index next = n + p;
  if (tc1) {
    slots.push_back({tc1, next, 0, p1});
    next += p1;
  }
  if (tc2) slots.push_back({tc2, next, p1, p2});

  for (const ChannelSlot& s : slots) {
    const Matrix c_src = aux.c.middleRows(s.src_off, s.dim);  // Cov(X_src, W)
    // Against W.
    const Matrix vs_w = s.tc->h * c_src + s.tc->shift * aux.q_w;
    full.block(s.row, 0, s.dim, n) = vs_w;
    full.block(0, s.row, n, s.dim) = vs_w.transpose();
    // Against the full pair.
    const Matrix q_pair_src = q.middleCols(s.src_off, s.dim);  // Cov(X, X_src)
    const Matrix vs_x =
        q_pair_src * s.tc->h.transpose() + aux.c * s.tc->shift.transpose();
    full.block(n, s.row, p, s.dim) = vs_x;
    full.block(s.row, n, s.dim, p) = vs_x.transpose();
  }
  // Channel-vs-channel blocks (noises are mutually independent).
  for (const ChannelSlot& a : slots) {
    const Matrix c_a = aux.c.middleRows(a.src_off, a.dim);
    for (const ChannelSlot& b : slots) {
      const Matrix c_b = aux.c.middleRows(b.src_off, b.dim);
      const Matrix q_ab = q.block(a.src_off, b.src_off, a.dim, b.dim);
      Matrix block = a.tc->h * q_ab * b.tc->h.transpose() +
                     a.tc->h * c_a * b.tc->shift.transpose() +
                     a.tc->shift * c_b.transpose() * b.tc->h.transpose() +
                     a.tc->shift * aux.q_w * b.tc->shift.transpose();
      if (a.row == b.row) block += a.tc->q_v;
      full.block(a.row, b.row, a.dim, b.dim) = block;
    }
  }
  return symmetrize(full);
}

double verify_structural_property(const SourceSpec& spec, const AuxParam& aux,
                                  const TestChannel& tc, int source) {
  if (source != 1 && source != 2) {
    throw DimensionMismatch("source selector must be 1 or 2");
  }
  const Index n = aux.n;
  const Index p1 = spec.p1, p2 = spec.p2, p = p1 + p2;
  const Index d = source == 1 ? p1 : p2;
  const Index src_off = source == 1 ? 0 : p1;
  const Matrix full = system_covariance(spec, aux, source == 1 ? &tc : nullptr,
                                        source == 2 ? &tc : nullptr);
  const Index hat_row = n + p;

  // y = (Xhat, W); the claim is E[X | y] = Xhat, i.e. the regression map
  // of X on y equals selection of the Xhat coordinates.
  Matrix sigma_y(d + n, d + n);
  sigma_y.topLeftCorner(d, d) = full.block(hat_row, hat_row, d, d);
  sigma_y.topRightCorner(d, n) = full.block(hat_row, 0, d, n);
  sigma_y.bottomLeftCorner(n, d) = full.block(0, hat_row, n, d);
  sigma_y.bottomRightCorner(n, n) = full.topLeftCorner(n, n);

  Matrix cross(d, d + n);
  cross.leftCols(d) = full.block(n + src_off, hat_row, d, d);
  cross.rightCols(n) = full.block(n + src_off, 0, d, n);

  Matrix selector = Matrix::Zero(d, d + n);
  selector.leftCols(d).setIdentity();

  // The conditional-mean property says Cov(X - Xhat, y) vanishes, and the
  // residual E[X | y] - Xhat is exactly the regression of X - Xhat onto y,
  // with covariance gap * pinv(sigma_y) * gap'. Subtracting the two
  // nearly-equal cross-covariances before touching the pseudo-inverse keeps
  // rounding flat even when sigma_y is close to singular (deep compression,
  // zero-rate channels); inverting first would scale the noise by the
  // condition number.
  const Matrix gap = cross - selector * sigma_y;
  const Matrix resid_cov =
      symmetrize(gap * pinv_psd(symmetrize(sigma_y)) * gap.transpose());
  return std::sqrt(std::max(0.0, max_eigenvalue(resid_cov)));
}

}  // namespace gw
