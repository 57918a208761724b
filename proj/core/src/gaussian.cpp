#include "gw/gaussian.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "gw/errors.hpp"
#include "gw/tolerances.hpp"

namespace gw {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = m.cwiseAbs().maxCoeff();
  const double gap = (m - m.transpose()).cwiseAbs().maxCoeff();
  return gap <= rel_tol * std::max(scale, 1.0);
}

void require_symmetric(const Matrix& m, const char* what) {
  if (!is_symmetric(m, tol::sym)) {
    throw NonSymmetricInput(std::string(what) + " must be symmetric");
  }
}

SymEig sym_eig(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m));
  if (solver.info() != Eigen::Success) {
    throw Error("eigendecomposition failed to converge");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double min_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return sym_eig(m).values.minCoeff();
}

double max_eigenvalue(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  return sym_eig(m).values.maxCoeff();
}

double operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  if (m.rows() == m.cols() && is_symmetric(m, 1e-9)) {
    return sym_eig(m).values.cwiseAbs().maxCoeff();
  }
  return std::sqrt(
      std::max(0.0, max_eigenvalue(Matrix(m.transpose() * m))));
}

bool is_psd(const Matrix& m) {
  if (m.size() == 0) return true;
  const SymEig eig = sym_eig(m);
  const double scale = eig.values.cwiseAbs().maxCoeff();
  return eig.values.minCoeff() >= -tol::psd * std::max(scale, 1.0);
}

Matrix pinv_psd(const Matrix& m) {
  if (m.size() == 0) return m;
  const SymEig eig = sym_eig(m);
  const double cutoff = tol::psd * std::max(eig.values.cwiseAbs().maxCoeff(), 0.0);
  Vector inv = Vector::Zero(eig.values.size());
  for (Index j = 0; j < eig.values.size(); ++j) {
    if (eig.values[j] > cutoff) inv[j] = 1.0 / eig.values[j];
  }
  return symmetrize(eig.vectors * inv.asDiagonal() * eig.vectors.transpose());
}

Matrix sqrt_psd(const Matrix& m) {
  if (m.size() == 0) return m;
  const SymEig eig = sym_eig(m);
  Vector root = eig.values.cwiseMax(0.0).cwiseSqrt();
  return symmetrize(eig.vectors * root.asDiagonal() * eig.vectors.transpose());
}

Matrix clip_eigenvalues(const Matrix& m, double floor) {
  if (m.size() == 0) return m;
  const SymEig eig = sym_eig(m);
  if (eig.values.minCoeff() >= floor) return symmetrize(m);
  Vector clipped = eig.values.cwiseMax(floor);
  return symmetrize(eig.vectors * clipped.asDiagonal() *
                    eig.vectors.transpose());
}

double log_det_psd(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const SymEig eig = sym_eig(m);
  double sum = 0.0;
  for (Index j = 0; j < eig.values.size(); ++j) {
    if (eig.values[j] <= 0.0) return -kInf;
    sum += std::log(eig.values[j]);
  }
  return sum;
}

Matrix SourceSpec::joint() const {
  Matrix q(p1 + p2, p1 + p2);
  q.topLeftCorner(p1, p1) = q_x1;
  q.topRightCorner(p1, p2) = q_x1x2;
  q.bottomLeftCorner(p2, p1) = q_x1x2.transpose();
  q.bottomRightCorner(p2, p2) = q_x2;
  return q;
}

void SourceSpec::validate() const {
  if (p1 < 1 || p2 < 1) {
    throw DimensionMismatch("source dimensions must be at least 1");
  }
  if (q_x1.rows() != p1 || q_x1.cols() != p1 || q_x2.rows() != p2 ||
      q_x2.cols() != p2 || q_x1x2.rows() != p1 || q_x1x2.cols() != p2) {
    throw DimensionMismatch("covariance block shapes disagree with p1/p2");
  }
  require_symmetric(q_x1, "Cov(X1)");
  require_symmetric(q_x2, "Cov(X2)");
  const Matrix q = joint();
  const SymEig eig = sym_eig(q);
  const double scale = std::max(eig.values.cwiseAbs().maxCoeff(), 1.0);
  if (eig.values.minCoeff() <= tol::psd * scale) {
    throw SingularMatrix("joint source covariance must be strictly positive definite");
  }
}

SourceSpec SourceSpec::scalar_pair(double var1, double var2, double cov) {
  SourceSpec s;
  s.p1 = 1;
  s.p2 = 1;
  s.q_x1 = Matrix::Constant(1, 1, var1);
  s.q_x2 = Matrix::Constant(1, 1, var2);
  s.q_x1x2 = Matrix::Constant(1, 1, cov);
  return s;
}

SourceSpec SourceSpec::correlated_scalars(double rho) {
  return scalar_pair(1.0, 1.0, rho);
}

Matrix CondCov::joint() const {
  const Index p1 = q1w.rows();
  const Index p2 = q2w.rows();
  Matrix q(p1 + p2, p1 + p2);
  q.topLeftCorner(p1, p1) = q1w;
  q.topRightCorner(p1, p2) = q12w;
  q.bottomLeftCorner(p2, p1) = q12w.transpose();
  q.bottomRightCorner(p2, p2) = q2w;
  return q;
}

CondCov CondCov::from_joint(const Matrix& q_cond, Index p1, Index p2) {
  if (q_cond.rows() != p1 + p2 || q_cond.cols() != p1 + p2) {
    throw DimensionMismatch("conditional covariance size is not p1 + p2");
  }
  require_symmetric(q_cond, "conditional covariance");
  CondCov c;
  c.q1w = symmetrize(q_cond.topLeftCorner(p1, p1));
  c.q2w = symmetrize(q_cond.bottomRightCorner(p2, p2));
  c.q12w = q_cond.topRightCorner(p1, p2);
  c.q1_given_2w = symmetrize(c.q1w - c.q12w * pinv_psd(c.q2w) * c.q12w.transpose());
  return c;
}

Matrix schur_conditional(const Matrix& q_joint, Index first_dim,
                         Block conditioned) {
  if (q_joint.rows() != q_joint.cols()) {
    throw DimensionMismatch("joint covariance must be square");
  }
  if (first_dim < 0 || first_dim > q_joint.rows()) {
    throw DimensionMismatch("leading block size out of range");
  }
  require_symmetric(q_joint, "joint covariance");
  const Index second_dim = q_joint.rows() - first_dim;
  const Matrix a = q_joint.topLeftCorner(first_dim, first_dim);
  const Matrix b = q_joint.bottomRightCorner(second_dim, second_dim);
  const Matrix cross = q_joint.topRightCorner(first_dim, second_dim);
  Matrix result;
  if (conditioned == Block::second) {
    result = a - cross * pinv_psd(b) * cross.transpose();
  } else {
    result = b - cross.transpose() * pinv_psd(a) * cross;
  }
  result = symmetrize(result);
  const double scale = std::max(operator_norm(q_joint), 1.0);
  if (min_eigenvalue(result) < -tol::psd * scale) {
    throw InfeasibleAux("conditioning produced an indefinite covariance");
  }
  return result;
}

double log_det_ratio_plus(const Matrix& q_num, const Matrix& q_den) {
  require_symmetric(q_num, "numerator");
  require_symmetric(q_den, "denominator");
  const double ld_den = log_det_psd(q_den);
  if (!(ld_den > std::log(tol::det))) {
    throw SingularMatrix("denominator determinant underflows");
  }
  const double ld_num = log_det_psd(q_num);
  return std::max(0.0, 0.5 * (ld_num - ld_den));
}

double mutual_information(const SourceSpec& spec, const CondCov& cond) {
  if (cond.q1w.rows() != spec.p1 || cond.q2w.rows() != spec.p2) {
    throw DimensionMismatch("conditional blocks disagree with the source");
  }
  const double ld_cond =
      log_det_psd(cond.q1_given_2w) + log_det_psd(cond.q2w);
  if (!(ld_cond > std::log(tol::det))) {
    throw SingularConditional(
        "conditional covariance factor is numerically singular");
  }
  const double ld_joint = log_det_psd(spec.joint());
  return std::max(0.0, 0.5 * (ld_joint - ld_cond));
}

}  // namespace gw
