#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/linalg/matrix.hpp"
#include "gated_spectra/random/ensembles.hpp"
#include "gated_spectra/random/rng.hpp"
#include "gated_spectra/simd/kernels.hpp"

using namespace gspec;
using simd::Backend;

namespace {

std::vector<double> random_vec(std::size_t n, RngStream& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    if (!simd::backend_available(Backend::Avx2)) GTEST_SKIP() << "no AVX2 on this machine";
    scalar_ = &table(Backend::Scalar);
    avx2_ = &table(Backend::Avx2);
  }
  static const simd::KernelTable& table(Backend b) {
    simd::ScopedBackend scope(b);
    return simd::kernels();
  }
  const simd::KernelTable* scalar_ = nullptr;
  const simd::KernelTable* avx2_ = nullptr;
};

// lengths straddle the 4- and 8-wide unrolls
const std::size_t kLengths[] = {0, 1, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 129, 1000};

}  // namespace

TEST_F(KernelEquivalence, TablesReportTheirBackend) {
  EXPECT_EQ(scalar_->backend, Backend::Scalar);
  EXPECT_EQ(avx2_->backend, Backend::Avx2);
}

TEST_F(KernelEquivalence, Dot) {
  RngStream rng(1, 0);
  for (std::size_t n : kLengths) {
    const auto a = random_vec(n, rng), b = random_vec(n, rng);
    double mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) mag += std::abs(a[i] * b[i]);
    EXPECT_NEAR(scalar_->dot(a.data(), b.data(), n), avx2_->dot(a.data(), b.data(), n),
                1e-14 * (mag + 1.0))
        << "n=" << n;
  }
}

TEST_F(KernelEquivalence, Dot3) {
  RngStream rng(2, 0);
  for (std::size_t n : kLengths) {
    const auto a = random_vec(n, rng), b = random_vec(n, rng);
    const auto s = scalar_->dot3(a.data(), b.data(), n);
    const auto v = avx2_->dot3(a.data(), b.data(), n);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(s[k], v[k], 1e-13 * (1.0 + std::abs(s[k]))) << n;
  }
}

TEST_F(KernelEquivalence, AxpyScaleRotate) {
  RngStream rng(3, 0);
  for (std::size_t n : kLengths) {
    const auto x = random_vec(n, rng), y0 = random_vec(n, rng);
    auto y1 = y0, y2 = y0;
    scalar_->axpy(0.37, x.data(), y1.data(), n);
    avx2_->axpy(0.37, x.data(), y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-15 * (1 + std::abs(y1[i])));

    scalar_->scale(-1.7, y1.data(), n);
    avx2_->scale(-1.7, y2.data(), n);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y1[i], y2[i], 1e-14 * (1 + std::abs(y1[i])));

    auto a1 = x, b1 = y0, a2 = x, b2 = y0;
    const double c = std::cos(0.3), s = std::sin(0.3);
    scalar_->rotate(a1.data(), b1.data(), n, c, s);
    avx2_->rotate(a2.data(), b2.data(), n, c, s);
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(a1[i], a2[i], 1e-14);
      EXPECT_NEAR(b1[i], b2[i], 1e-14);
      EXPECT_NEAR(a1[i], c * x[i] - s * y0[i], 1e-14);
    }
  }
}

TEST_F(KernelEquivalence, Gemm) {
  RngStream rng(4, 0);
  const std::size_t dims[][3] = {{1, 1, 1}, {3, 5, 7}, {8, 8, 8}, {17, 9, 33}, {64, 64, 64}, {5, 130, 3}};
  for (const auto& d : dims) {
    const auto a = random_vec(d[0] * d[1], rng), b = random_vec(d[1] * d[2], rng);
    std::vector<double> c1(d[0] * d[2]), c2(d[0] * d[2]);
    scalar_->gemm(a.data(), b.data(), c1.data(), d[0], d[1], d[2]);
    avx2_->gemm(a.data(), b.data(), c2.data(), d[0], d[1], d[2]);
    for (std::size_t i = 0; i < c1.size(); ++i) {
      EXPECT_NEAR(c1[i], c2[i], 1e-13 * std::sqrt(static_cast<double>(d[1])) * 4);
    }
    // naive triple loop as a third opinion
    for (std::size_t i = 0; i < d[0]; ++i)
      for (std::size_t j = 0; j < d[2]; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < d[1]; ++k) s += a[i * d[1] + k] * b[k * d[2] + j];
        EXPECT_NEAR(c1[i * d[2] + j], s, 1e-12);
      }
  }
}

TEST_F(KernelEquivalence, SvdAgreesAcrossBackends) {
  RngStream rng(5, 0);
  const Matrix m = sample_ginibre(40, 1.0, rng);
  SvdFactors a, b;
  {
    simd::ScopedBackend scope(Backend::Scalar);
    a = svd(m);
  }
  {
    simd::ScopedBackend scope(Backend::Avx2);
    b = svd(m);
  }
  for (std::size_t i = 0; i < a.s.size(); ++i) EXPECT_NEAR(a.s[i], b.s[i], 1e-12 * a.s[0]);
  EXPECT_LT(max_abs_diff(a.U, b.U), 1e-9);
}

TEST(KernelDispatch, ScalarAlwaysAvailableAndRestoredByScope) {
  EXPECT_TRUE(simd::backend_available(Backend::Scalar));
  const Backend before = simd::active_backend();
  {
    simd::ScopedBackend scope(Backend::Scalar);
    EXPECT_EQ(simd::active_backend(), Backend::Scalar);
    EXPECT_EQ(simd::kernels().backend, Backend::Scalar);
  }
  EXPECT_EQ(simd::active_backend(), before);
  EXPECT_EQ(simd::backend_name(Backend::Scalar), "scalar");
}
