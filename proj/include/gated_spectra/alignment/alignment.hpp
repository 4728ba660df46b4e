#pragma once
// Alignment of left singular vectors under spectral separation.
//
// For J = A B with A strongly separated, R = U_A^T U_J tends to the identity
// on the top r x r block. With C = B B^T and C^{r,r} = T Sigma T^T (T unit
// lower triangular) the first-order behaviour is
//   R_ij ~ T_ij (s_i / s_j)         for i > j,
//   R_ij ~ (T^{-1})_ji (s_j / s_i)  for i < j,
//   (s_{J,i} / s_{A,i})^2 -> Sigma_i = det C^{i,i} / det C^{i-1,i-1},
// where s are the singular values of A.

#include <cstddef>
#include <span>
#include <vector>

#include "gated_spectra/linalg/matrix.hpp"
#include "gated_spectra/random/ensembles.hpp"

namespace gspec {

struct RotationMatrix {
  Matrix R;
  std::size_t r = 0;
  /// max |(R^{r,r} - I)_ij|
  double sup_deviation = 0.0;
};

/// R = U_ref^T sign_align(U_ref, U_target). Both inputs need orthonormal
/// columns (to 1e-8) and equal shapes; 1 <= r <= cols.
RotationMatrix rotation(const Matrix& u_ref, const Matrix& u_target, std::size_t r);

/// Pearson correlation between row and column index under the mass
/// distribution |A_ij| / sum |A|. 1 for diagonal support, -1 for
/// antidiagonal support. Throws DomainError when the mass sits in a single
/// row or column (or A is zero).
double diagonal_correlation(const Matrix& a);

struct AlignmentPrediction {
  Matrix T;                   // r x r unit lower triangular
  std::vector<double> Sigma;  // Cholesky diagonal
  std::vector<double> ell;    // det C^{i,i} / det C^{i-1,i-1} by minors
};

/// From C^{r,r} with C = B B^T. Throws NotPositiveDefinite when the first r
/// rows of B are linearly dependent.
AlignmentPrediction predict_alignment(const Matrix& b, std::size_t r);

struct OffDiagonalEntry {
  std::size_t i = 0;  // 1-based
  std::size_t j = 0;
  double observed = 0.0;
  double predicted = 0.0;
};

struct AlignmentReport {
  double parameter = 0.0;  // tau for sweeps, split index for products
  std::vector<OffDiagonalEntry> off_diagonal;
  double diag_corr = 0.0;  // of R^{r,r}
  double sup_deviation = 0.0;
  /// max |(S^{-1} R S)^{r,r} - T| and max |S R S^{-1} - (T^{-1})^T| on the block
  double lower_limit_error = 0.0;
  double upper_limit_error = 0.0;
  /// max |(s_J,i / s_A,i)^2 - Sigma_i|
  double sigma_limit_error = 0.0;
  /// largest strictly upper entry of (S^{-1} R S)^{r,r} in magnitude
  double strict_upper_max = 0.0;
};

/// For each tau: A = diag(e^{(n-1) tau}, ..., e^{tau}, 1), J = A B, and the
/// observed rotation against the first-order predictions.
std::vector<AlignmentReport> synthetic_alignment_sweep(const Matrix& b, std::size_t r,
                                                       std::span<const double> taus);

struct ProductAlignment {
  std::size_t split = 0;
  double diag_corr_uu = 0.0;        // full U_J^T U_A
  double diag_corr_uu_block = 0.0;  // top-left block of U_J^T U_A
  double diag_corr_uaau = 0.0;      // top-left block of U_J^T A A^T U_J
  double diag_corr_aa = 0.0;        // top-left block of A A^T
  double sup_deviation = 0.0;       // of the block of U_A^T U_J after sign alignment
};

/// J = M_L ... M_1 and A = M_L ... M_{split+1} with M = D W from `layers`
/// (first entry is layer 1). 1 <= split < L.
ProductAlignment product_alignment_report(std::span<const GatedLayer> layers, std::size_t split,
                                          std::size_t block = 10);

}  // namespace gspec
