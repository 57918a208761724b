#pragma once

// Numeric policy for the whole library. All comparisons against these
// constants are relative to a problem scale unless a comment says
// otherwise; the individual call sites spell out which scale they use.

namespace gw::tol {

// Eigenvalues below psd * (largest eigenvalue magnitude) are treated as
// zero, both when checking positive semidefiniteness and when forming
// pseudo-inverses.
inline constexpr double psd = 1e-10;

// Relative symmetry tolerance: max |M - M^T| entry over max |M| entry.
inline constexpr double sym = 1e-12;

// Absolute determinant underflow guard for log-det ratios.
inline constexpr double det = 1e-300;

// Generic floating-point slack for identities that hold exactly in
// real arithmetic (trace budgets, factorization residuals, ...).
inline constexpr double fp = 1e-9;

// Commutator norm bound ||A B - B A||_F / ||B||_F required before two
// matrices are accepted as simultaneously diagonalizable.
inline constexpr double commute = 1e-8;

// Absolute bisection tolerance on the reverse water-filling level.
inline constexpr double water = 1e-12;

// Relative objective-change convergence threshold for iterative solvers.
inline constexpr double opt = 1e-8;

// Stationarity / complementarity residual accepted as "converged".
inline constexpr double kkt = 1e-6;

// Residual threshold under which a rate triple counts as sitting on the
// minimum-sum-rate face of the region.
inline constexpr double plane = 1e-6;

}  // namespace gw::tol
