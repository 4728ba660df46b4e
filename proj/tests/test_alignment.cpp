#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gated_spectra/alignment/alignment.hpp"
#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/random/ensembles.hpp"
#include "gated_spectra/random/rng.hpp"
#include "gated_spectra/util/errors.hpp"

using namespace gspec;

TEST(DiagonalCorrelation, ExactReferenceValues) {
  for (std::size_t n : {2, 5, 16}) {
    EXPECT_EQ(diagonal_correlation(Matrix::identity(n)), 1.0);
    Matrix ex(n, n), ones(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      ex(i, n - 1 - i) = 1.0;
      for (std::size_t j = 0; j < n; ++j) ones(i, j) = 1.0;
    }
    EXPECT_EQ(diagonal_correlation(ex), -1.0);
    EXPECT_EQ(diagonal_correlation(ones), 0.0);
  }
}

TEST(DiagonalCorrelation, ScaleAndSignInvariance) {
  RngStream rng(31, 0);
  for (int t = 0; t < 100; ++t) {
    const Matrix a = sample_ginibre(7, 1.0, rng);
    const double rho = diagonal_correlation(a);
    EXPECT_GE(rho, -1.0);
    EXPECT_LE(rho, 1.0);
    Matrix b = a;
    b *= -3.5;
    b(2, 4) = -b(2, 4);
    EXPECT_NEAR(diagonal_correlation(b), rho, 1e-14);
  }
}

TEST(DiagonalCorrelation, DegenerateInputs) {
  EXPECT_THROW(diagonal_correlation(Matrix(3, 3)), DomainError);
  Matrix row(3, 3);
  row(1, 0) = row(1, 2) = 1.0;
  EXPECT_THROW(diagonal_correlation(row), DomainError);
  EXPECT_THROW(diagonal_correlation(Matrix(2, 3)), ShapeMismatch);
}

TEST(Rotation, IdentityForEqualBases) {
  RngStream rng(32, 0);
  const Matrix q = sample_haar_orthogonal(6, rng);
  const auto r = rotation(q, q, 3);
  EXPECT_LT(r.sup_deviation, 1e-13);
  Matrix flipped = q;
  for (std::size_t i = 0; i < 6; ++i) flipped(i, 1) = -flipped(i, 1);
  EXPECT_LT(rotation(q, flipped, 6).sup_deviation, 1e-13);
  EXPECT_THROW(rotation(q, sample_ginibre(6, 1.0, rng), 2), DomainError);
}

TEST(AlignmentPrediction, CholeskyOfLeadingBlock) {
  RngStream rng(33, 0);
  const Matrix b = sample_ginibre(5, 1.0, rng);
  const auto pred = predict_alignment(b, 3);
  const Matrix c = times_transpose(b, b).leading(3);
  Matrix ts = pred.T;
  scale_cols(ts, pred.Sigma);
  EXPECT_LT(max_abs_diff(times_transpose(ts, pred.T), c), 1e-11);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_NEAR(pred.ell[i], pred.Sigma[i], 1e-10 * pred.Sigma[i]);

  Matrix dep = b;
  for (std::size_t j = 0; j < 5; ++j) dep(1, j) = 2.0 * dep(0, j);
  EXPECT_THROW(predict_alignment(dep, 3), NotPositiveDefinite);
}

TEST(SyntheticSweep, ConvergesToIdentityWithFirstOrderRates) {
  RngStream rng(34, 0);
  const Matrix b = sample_ginibre(5, 1.0, rng);
  const std::vector<double> taus = {2, 4, 8, 20};
  const auto reps = synthetic_alignment_sweep(b, 3, taus);
  ASSERT_EQ(reps.size(), taus.size());
  EXPECT_LT(reps.back().sup_deviation, 1e-6);
  double prev = 1e300;
  for (const auto& rep : reps) {
    double worst = 0.0;
    for (const auto& e : rep.off_diagonal) worst = std::max(worst, std::abs(e.observed / e.predicted - 1.0));
    EXPECT_LT(worst, prev);
    prev = worst;
    if (rep.parameter == 4) {
      EXPECT_LT(worst, 0.1);
    }
  }
  EXPECT_LT(reps.back().lower_limit_error, 1e-6);
  EXPECT_LT(reps.back().upper_limit_error, 1e-6);
  EXPECT_LT(reps.back().sigma_limit_error, 1e-6);
}

TEST(ProductAlignment, ReportsAllFields) {
  RngStream rng(35, 0);
  const LayerEnsemble e{12, 1, 1.0, 1.0 / std::sqrt(12.0)};
  std::vector<GatedLayer> layers;
  for (int l = 0; l < 6; ++l) layers.push_back(sample_layer(e, rng));
  for (std::size_t s = 1; s < 6; ++s) {
    const auto rep = product_alignment_report(layers, s, 4);
    EXPECT_EQ(rep.split, s);
    for (double v : {rep.diag_corr_uu, rep.diag_corr_uu_block, rep.diag_corr_uaau, rep.diag_corr_aa}) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
    }
  }
  EXPECT_THROW(product_alignment_report(layers, 6), DomainError);
  EXPECT_THROW(product_alignment_report(layers, 0), DomainError);
}
