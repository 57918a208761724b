#pragma once

#include <Eigen/Dense>

namespace gw {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// (M + M^T) / 2. Applied after arithmetic that should preserve symmetry
// but may not, bit for bit.
Matrix symmetrize(const Matrix& m);

// Relative symmetry test: max entry of |M - M^T| against max entry of |M|.
bool is_symmetric(const Matrix& m, double rel_tol);

// Throws NonSymmetricInput mentioning `what` if the test above fails at
// the library-wide symmetry tolerance.
void require_symmetric(const Matrix& m, const char* what);

struct SymEig {
  Vector values;   // ascending
  Matrix vectors;  // columns match values
};

// Eigendecomposition of a symmetric matrix (input is symmetrized first).
SymEig sym_eig(const Matrix& m);

// Smallest and largest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& m);
double max_eigenvalue(const Matrix& m);

// Spectral norm. Works for rectangular inputs.
double operator_norm(const Matrix& m);

// True if all eigenvalues exceed -psd_tol * max|eigenvalue|.
bool is_psd(const Matrix& m);

// Moore-Penrose inverse of a symmetric PSD matrix: eigenvalues below
// psd_tol * (largest eigenvalue) are zeroed rather than inverted, so a
// singular input yields the pseudo-inverse on its range.
Matrix pinv_psd(const Matrix& m);

// Symmetric square root with negative eigenvalues clipped to zero.
Matrix sqrt_psd(const Matrix& m);

// Eigenvalue floor: any eigenvalue below `floor` is raised to it.
Matrix clip_eigenvalues(const Matrix& m, double floor);

// log det of a symmetric matrix through its spectrum. Returns -inf when
// any eigenvalue is <= 0, +inf never.
double log_det_psd(const Matrix& m);

}  // namespace gw
