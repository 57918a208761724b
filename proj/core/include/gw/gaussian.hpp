#pragma once

#include "gw/linalg.hpp"

namespace gw {

// A pair of jointly Gaussian, zero-mean vector sources described by the
// blocks of their joint covariance
//
//     [ q_x1    q_x1x2 ]
//     [ q_x1x2' q_x2   ]
//
// All rates downstream are in nats and all distortions are square error.
struct SourceSpec {
  Index p1 = 0;
  Index p2 = 0;
  Matrix q_x1;    // p1 x p1
  Matrix q_x2;    // p2 x p2
  Matrix q_x1x2;  // p1 x p2

  // Assembled (p1+p2) x (p1+p2) joint covariance.
  Matrix joint() const;

  // Throws DimensionMismatch / NonSymmetricInput / SingularMatrix if the
  // blocks do not form a symmetric, strictly positive definite joint
  // covariance.
  void validate() const;

  // Convenience for the ubiquitous 1+1 case.
  static SourceSpec scalar_pair(double var1, double var2, double cov);

  // Unit-variance scalar pair with correlation rho.
  static SourceSpec correlated_scalars(double rho);
};

// Conditional covariance of the source pair given some auxiliary vector,
// carried in blocks plus the nested conditional of source 1 given both
// source 2 and the auxiliary.
struct CondCov {
  Matrix q1w;          // Cov(X1 | W)
  Matrix q2w;          // Cov(X2 | W)
  Matrix q12w;         // Cov(X1, X2 | W), p1 x p2
  Matrix q1_given_2w;  // Cov(X1 | X2, W)

  Matrix joint() const;  // the (p1+p2)^2 conditional covariance

  // Splits a conditional joint covariance into blocks and derives the
  // nested conditional via a Schur complement.
  static CondCov from_joint(const Matrix& q_cond, Index p1, Index p2);
};

enum class Block { first, second };

// Schur complement of `q_joint` with respect to one of its two diagonal
// blocks; `first_dim` is the size of the leading block. Conditioning on
// the second block returns q_A - q_AB q_B^+ q_AB', of the leading size.
// The conditioned block is inverted through its pseudo-inverse, so a
// singular conditioning block means conditioning on its range only.
Matrix schur_conditional(const Matrix& q_joint, Index first_dim,
                         Block conditioned);

// (1/2) ln max{1, det(q_num)/det(q_den)}. Computed through log
// determinants; throws SingularMatrix if det(q_den) underflows.
double log_det_ratio_plus(const Matrix& q_num, const Matrix& q_den);

// I(X1, X2; W) for a conditional covariance produced by some auxiliary W:
// half the clamped log ratio of the unconditional determinant to the
// product det Cov(X1 | X2, W) * det Cov(X2 | W).
double mutual_information(const SourceSpec& spec, const CondCov& cond);

}  // namespace gw
