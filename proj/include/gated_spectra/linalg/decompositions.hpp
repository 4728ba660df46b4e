#pragma once
// Factorizations with fixed conventions: descending singular values,
// deterministic signs, positive-diagonal QR, unit-diagonal Cholesky.

#include <cstddef>
#include <vector>

#include "gated_spectra/linalg/matrix.hpp"

namespace gspec {

/// M = U diag(s) V^T with s non-increasing and non-negative.
///
/// For an m x n input with m >= n, U is m x n and V is n x n; for m < n the
/// roles are swapped so that U is m x m and V is n x m. Each column of U has
/// its largest-magnitude entry positive (the matching column of V is flipped
/// with it). Exactly tied singular values keep the order of a stable sort.
struct SvdFactors {
  Matrix U;
  std::vector<double> s;
  Matrix V;
};

/// One-sided Jacobi SVD preconditioned by column-pivoted Householder QR,
/// which keeps small singular values of graded matrices accurate to high
/// relative precision. Throws NumericalFailure if the sweeps do not converge.
SvdFactors svd(const Matrix& m);

/// Returns target with column j negated whenever reference_j . target_j < 0.
Matrix sign_align(const Matrix& reference, const Matrix& target);

struct QrFactors {
  Matrix Q;  // m x n, orthonormal columns
  Matrix R;  // n x n, upper triangular
};

/// Householder QR with R_ii > 0. Requires rows >= cols; throws RankDeficient
/// when |R_ii| < 1e-13 * max|M_ij|.
QrFactors qr_positive(const Matrix& m);

/// Same factorization without the rank check: a vanishing pivot leaves a
/// zero R_ii (and an arbitrary unit Q column). Used by the QR sweep, where
/// rank collapse is an expected outcome rather than an error.
QrFactors qr_nonnegative(const Matrix& m);

/// C = T diag(Sigma) T^T with T unit lower-triangular.
struct CholeskyUnitFactors {
  Matrix T;
  std::vector<double> Sigma;
};

/// Throws DomainError when C is not symmetric to 1e-10 (relative to max|C|)
/// and NotPositiveDefinite on a non-positive pivot.
CholeskyUnitFactors cholesky_unit(const Matrix& c);

/// log|det M| by partial-pivoting LU. An exactly singular M returns -infinity.
double log_abs_det(const Matrix& m);

/// det M by partial-pivoting LU.
double determinant(const Matrix& m);

/// Inverse of a unit lower-triangular matrix.
Matrix unit_lower_inverse(const Matrix& t);

/// max_ij |(Q^T Q - I)_ij|
double orthonormality_defect(const Matrix& q);

}  // namespace gspec
