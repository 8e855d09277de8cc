#pragma once

#include <vector>

#include "pbt/mat.hpp"

namespace pbt {

struct EigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  CMat vectors;                     // unit-norm eigenvectors as columns
  double reconstruction_error;      // ||V D V^dag - H||_F / max(1, ||H||_F)
};

struct RealEigenDecomposition {
  std::vector<double> eigenvalues;  // ascending
  RMat vectors;                     // orthonormal columns
};

// Hermitian eigendecomposition via cyclic Jacobi on the 2n x 2n real-symmetric
// embedding [[Re H, -Im H], [Im H, Re H]]. Matrices with exactly zero
// imaginary part take a direct real-symmetric path (identical spectrum, no
// embedding). Throws ValidationError if the hermiticity defect exceeds
// 1e-10 * max(1, max|entry|). Deterministic: identical input bits give
// identical output bits regardless of thread count.
EigenDecomposition eigh(const CMat& h);

// Real-symmetric Jacobi. Serial cyclic sweeps below 128 rows; above that a
// tournament ordering whose disjoint rotation pairs are applied in parallel
// (two phases: all row updates, then all column updates).
RealEigenDecomposition eigh_sym(const RMat& a);

namespace ref {
// Serial cyclic Jacobi regardless of size.
RealEigenDecomposition eigh_sym(const RMat& a);
}

// f(H) for Hermitian H through its eigendecomposition.
CMat hermitian_function(const CMat& h, double (*f)(double));

// H^{-1/2} restricted to the support: eigenvalues above rank_tol * lambda_max
// are inverted, those in [-rank_tol*lambda_max, rank_tol*lambda_max] are
// dropped, anything more negative throws ValidationError.
CMat inv_sqrt_on_support(const CMat& h, double rank_tol = 1e-12);

// Square root of a PSD matrix; eigenvalues clipped to 0 if within tol of it,
// throws ValidationError below -tol * max(1, lambda_max).
CMat sqrt_psd(const CMat& h, double tol = 1e-9);

struct PsdReport {
  bool ok;
  double min_eigenvalue;
};

// min eigenvalue >= -tol * max(1, max|entry|)?
PsdReport psd_check(const CMat& h, double tol);

// Process-wide default tolerance for PSD checks (PBT_TOL / --tol plumbing).
double default_psd_tol();
void set_default_psd_tol(double tol);

}  // namespace pbt
