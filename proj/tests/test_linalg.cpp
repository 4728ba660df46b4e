#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/linalg/matrix.hpp"
#include "gated_spectra/linalg/special.hpp"
#include "gated_spectra/linalg/wedge.hpp"
#include "gated_spectra/random/ensembles.hpp"
#include "gated_spectra/random/rng.hpp"
#include "gated_spectra/util/errors.hpp"

using namespace gspec;

namespace {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

Matrix reconstruct(const SvdFactors& f) {
  Matrix us = f.U;
  scale_cols(us, f.s);
  return times_transpose(us, f.V);
}

}  // namespace

TEST(Matrix, BasicOps) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  EXPECT_EQ(a * b, (Matrix{{2, 1}, {4, 3}}));
  EXPECT_EQ(a.transpose(), (Matrix{{1, 3}, {2, 4}}));
  EXPECT_EQ(transpose_times(a, b), a.transpose() * b);
  EXPECT_EQ(times_transpose(a, b), a * b.transpose());
  EXPECT_DOUBLE_EQ(frobenius_inner(a, a), 30.0);
  EXPECT_DOUBLE_EQ(a.frobenius_norm(), std::sqrt(30.0));
  EXPECT_EQ(a.block(1, 0, 1, 2), (Matrix{{3, 4}}));
  EXPECT_THROW(a * Matrix(3, 3), ShapeMismatch);
}

TEST(Matrix, ProductMatchesEigenOnOddShapes) {
  RngStream rng(11, 0);
  const Matrix a = sample_gaussian(37, 19, 1.0, rng);
  const Matrix b = sample_gaussian(19, 23, 1.0, rng);
  const Eigen::MatrixXd ref = to_eigen(a) * to_eigen(b);
  const Matrix c = a * b;
  double err = 0.0;
  for (std::size_t i = 0; i < c.rows(); ++i)
    for (std::size_t j = 0; j < c.cols(); ++j) err = std::max(err, std::abs(c(i, j) - ref(i, j)));
  EXPECT_LT(err, 1e-12);
}

TEST(Qr, PositiveDiagonalAndReconstruction) {
  RngStream rng(12, 0);
  const Matrix m = sample_gaussian(30, 12, 1.0, rng);
  const auto f = qr_positive(m);
  EXPECT_LT(orthonormality_defect(f.Q), 1e-13);
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_GT(f.R(i, i), 0.0);
    for (std::size_t j = 0; j < i; ++j) EXPECT_EQ(f.R(i, j), 0.0);
  }
  EXPECT_LT(max_abs_diff(f.Q * f.R, m), 1e-12);
}

TEST(Qr, RankDeficientInputs) {
  Matrix m(4, 2);
  for (std::size_t i = 0; i < 4; ++i) m(i, 0) = m(i, 1) = 1.0 + i;
  EXPECT_THROW(qr_positive(m), RankDeficient);
  const auto f = qr_nonnegative(m);
  EXPECT_NEAR(f.R(1, 1), 0.0, 1e-12);
  EXPECT_LT(max_abs_diff(f.Q * f.R, m), 1e-12);
}

TEST(Svd, MatchesEigenJacobi) {
  RngStream rng(13, 0);
  for (auto [r, c] : std::vector<std::pair<int, int>>{{1, 1}, {5, 5}, {20, 7}, {7, 20}, {64, 64}}) {
    const Matrix m = sample_gaussian(r, c, 1.0, rng);
    const auto f = svd(m);
    Eigen::JacobiSVD<Eigen::MatrixXd> ref(to_eigen(m));
    ASSERT_EQ(f.s.size(), static_cast<std::size_t>(ref.singularValues().size()));
    for (std::size_t i = 0; i < f.s.size(); ++i)
      EXPECT_NEAR(f.s[i], ref.singularValues()(i), 1e-12 * ref.singularValues()(0));
    EXPECT_LT(max_abs_diff(reconstruct(f), m), 1e-12);
    EXPECT_LT(orthonormality_defect(f.U), 1e-12);
    EXPECT_LT(orthonormality_defect(f.V), 1e-12);
    EXPECT_TRUE(std::is_sorted(f.s.rbegin(), f.s.rend()));
  }
}

TEST(Svd, GradedMatrixKeepsRelativeAccuracy) {
  // D1 Q D2 with singular values spread over 30 orders of magnitude
  RngStream rng(14, 0);
  const std::size_t n = 12;
  const Matrix q = sample_haar_orthogonal(n, rng);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = std::pow(10.0, -2.5 * static_cast<double>(i));
  const Matrix m = Matrix::diagonal(d) * q;
  const auto f = svd(m);
  std::vector<double> sorted = d;
  std::sort(sorted.rbegin(), sorted.rend());
  for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(f.s[i] / sorted[i], 1.0, 1e-10) << i;
}

TEST(Svd, SignConventionAndZeroMatrix) {
  RngStream rng(15, 0);
  const auto f = svd(sample_gaussian(6, 4, 1.0, rng));
  for (std::size_t c = 0; c < f.U.cols(); ++c) {
    const auto col = f.U.column(c);
    const auto it = std::max_element(col.begin(), col.end(),
                                     [](double a, double b) { return std::abs(a) < std::abs(b); });
    EXPECT_GT(*it, 0.0);
  }
  const auto z = svd(Matrix(3, 3));
  for (double s : z.s) EXPECT_EQ(s, 0.0);
}

TEST(Svd, SignAlignFlipsColumns) {
  const Matrix ref = Matrix::identity(3);
  Matrix t = ref;
  t(1, 1) = -1.0;
  EXPECT_EQ(sign_align(ref, t), ref);
}

TEST(Cholesky, UnitFactorization) {
  RngStream rng(16, 0);
  const Matrix b = sample_gaussian(5, 8, 1.0, rng);
  const Matrix c = times_transpose(b, b);
  const auto f = cholesky_unit(c);
  Matrix tst = f.T;
  scale_cols(tst, f.Sigma);
  EXPECT_LT(max_abs_diff(times_transpose(tst, f.T), c), 1e-11);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(f.T(i, i), 1.0);
  EXPECT_LT(max_abs_diff(unit_lower_inverse(f.T) * f.T, Matrix::identity(5)), 1e-12);
  EXPECT_THROW(cholesky_unit(Matrix{{1, 2}, {2, 1}}), NotPositiveDefinite);
  EXPECT_THROW(cholesky_unit(Matrix{{1, 2}, {0, 1}}), DomainError);
}

TEST(Determinant, MatchesEigen) {
  RngStream rng(17, 0);
  const Matrix m = sample_gaussian(9, 9, 1.0, rng);
  const double ref = to_eigen(m).determinant();
  EXPECT_NEAR(determinant(m), ref, 1e-11 * std::abs(ref));
  EXPECT_NEAR(log_abs_det(m), std::log(std::abs(ref)), 1e-12);
  EXPECT_EQ(log_abs_det(Matrix(2, 2)), -std::numeric_limits<double>::infinity());
}

TEST(Special, DigammaKnownValues) {
  constexpr double euler = 0.57721566490153286061;
  EXPECT_NEAR(digamma(1.0), -euler, 1e-14);
  EXPECT_NEAR(digamma(0.5), -euler - 2.0 * std::numbers::ln2, 1e-14);
  EXPECT_NEAR(digamma(8.0), -euler + 1 + 1. / 2 + 1. / 3 + 1. / 4 + 1. / 5 + 1. / 6 + 1. / 7, 1e-14);
  EXPECT_NEAR(digamma(100.5) - digamma(99.5), 1.0 / 99.5, 1e-14);
  // psi(x+1) = psi(x) + 1/x over a range of arguments
  for (double x = 0.05; x < 40.0; x *= 1.37) EXPECT_NEAR(digamma(x + 1) - digamma(x), 1.0 / x, 1e-12 / x);
}

TEST(Special, LogBinomial) {
  EXPECT_NEAR(log_binomial(10, 3), std::log(120.0), 1e-12);
  EXPECT_NEAR(log_binomial(7, 0), 0.0, 1e-12);
  EXPECT_NEAR(log_binomial(128, 64), std::lgamma(129.0) - 2 * std::lgamma(65.0), 1e-9);
}

TEST(Wedge, CombinationsAreLexicographic) {
  const auto c = combinations(4, 2);
  ASSERT_EQ(c.size(), 6u);
  EXPECT_EQ(c.front(), (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(c[1], (std::vector<std::size_t>{0, 2}));
  EXPECT_EQ(c.back(), (std::vector<std::size_t>{2, 3}));
}

TEST(Wedge, SingularValuesAreProducts) {
  RngStream rng(18, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + trial % 4, t = 1 + trial % 3;
    const Matrix m = sample_ginibre(n, 1.0, rng);
    const auto s = svd(m).s;
    std::vector<double> prods;
    for (const auto& idx : combinations(n, t)) {
      double p = 1.0;
      for (auto i : idx) p *= s[i];
      prods.push_back(p);
    }
    std::sort(prods.rbegin(), prods.rend());
    const auto ws = svd(wedge(m, t)).s;
    for (std::size_t i = 0; i < prods.size(); ++i) EXPECT_NEAR(ws[i] / prods[i], 1.0, 1e-8);
  }
}

TEST(Wedge, CapacityGuard) {
  EXPECT_THROW(wedge(Matrix::identity(30), 15), CapacityError);
  EXPECT_EQ(wedge(Matrix::identity(4), 4), Matrix::identity(1));
}
