// One-sided Jacobi SVD with QR preconditioning.
//
// M P = Q R (column-pivoted Householder), then row-wise Jacobi rotations
// Theta R = Y until the rows of Y are mutually orthogonal. With y_i = s_i w_i^T
// this gives M = (Q Theta^T) diag(s) (P W)^T. Working on R^T rather than R
// both speeds convergence and preserves relative accuracy for matrices that
// are graded by rows or columns.
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/simd/kernels.hpp"
#include "gated_spectra/util/errors.hpp"
#include "householder.hpp"

namespace gspec {
namespace {

constexpr int kMaxSweeps = 80;

void canonicalize_signs(SvdFactors& f) {
  for (std::size_t j = 0; j < f.U.cols(); ++j) {
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < f.U.rows(); ++i) {
      if (std::abs(f.U(i, j)) > best) {
        best = std::abs(f.U(i, j));
        arg = i;
      }
    }
    if (f.U(arg, j) < 0.0) {
      for (std::size_t i = 0; i < f.U.rows(); ++i) f.U(i, j) = -f.U(i, j);
      for (std::size_t i = 0; i < f.V.rows(); ++i) f.V(i, j) = -f.V(i, j);
    }
  }
}

// Replace rows flagged in `missing` by unit vectors orthogonal to all others.
void complete_orthonormal_rows(Matrix& w, const std::vector<bool>& missing) {
  const std::size_t n = w.cols();
  const auto& k = simd::kernels();
  std::vector<bool> have(w.rows());
  for (std::size_t i = 0; i < w.rows(); ++i) have[i] = !missing[i];
  for (std::size_t i = 0; i < w.rows(); ++i) {
    if (have[i]) continue;
    std::vector<double> best;
    double best_norm = -1.0;
    for (std::size_t p = 0; p < n; ++p) {
      std::vector<double> cand(n, 0.0);
      cand[p] = 1.0;
      for (int pass = 0; pass < 2; ++pass)
        for (std::size_t r = 0; r < w.rows(); ++r) {
          if (!have[r]) continue;
          const double proj = k.dot(w.row(r).data(), cand.data(), n);
          k.axpy(-proj, w.row(r).data(), cand.data(), n);
        }
      const double nrm = std::sqrt(k.dot(cand.data(), cand.data(), n));
      if (nrm > best_norm) {
        best_norm = nrm;
        best = std::move(cand);
      }
      if (best_norm > 0.7) break;
    }
    k.scale(1.0 / best_norm, best.data(), n);
    std::copy(best.begin(), best.end(), w.row(i).begin());
    have[i] = true;
  }
}

SvdFactors svd_tall(const Matrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t n = m.cols();
  const auto& k = simd::kernels();
  if (n == 0) return {Matrix(rows, 0), {}, Matrix(0, 0)};

  // Power-of-two prescale so that dot products neither overflow nor sink
  // into subnormals.
  const double amax = m.max_abs();
  int exponent = 0;
  if (amax > 0.0) std::frexp(amax, &exponent);
  Matrix a = m;
  if (exponent != 0)
    for (double& v : std::span<double>(a.data(), a.size())) v = std::ldexp(v, -exponent);

  auto qr = detail::householder_qr(a, true);
  Matrix& y = qr.R;  // rotated in place
  Matrix theta = Matrix::identity(n);

  const double tol = std::numeric_limits<double>::epsilon() * static_cast<double>(n);
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        double* yi = y.row(i).data();
        double* yj = y.row(j).data();
        const auto [aa, bb, ab] = k.dot3(yi, yj, n);
        if (aa == 0.0 || bb == 0.0) continue;
        if (std::abs(ab) <= tol * std::sqrt(aa) * std::sqrt(bb)) continue;
        converged = false;
        const double zeta = (bb - aa) / (2.0 * ab);
        double t;
        if (std::abs(zeta) > 1e150) {
          t = 0.5 / zeta;
        } else {
          t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        }
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        k.rotate(yi, yj, n, c, s);
        k.rotate(theta.row(i).data(), theta.row(j).data(), n, c, s);
      }
    }
  }
  if (!converged)
    throw NumericalFailure("svd: Jacobi sweeps did not converge within " +
                           std::to_string(kMaxSweeps) + " sweeps");

  std::vector<double> sigma(n);
  std::vector<bool> missing(n, false);
  constexpr double kTiny = std::numeric_limits<double>::min() * 0x1p60;
  for (std::size_t i = 0; i < n; ++i) {
    double* yi = y.row(i).data();
    sigma[i] = std::sqrt(k.dot(yi, yi, n));
    if (sigma[i] > kTiny) {
      k.scale(1.0 / sigma[i], yi, n);
    } else {
      missing[i] = true;
    }
  }
  if (std::find(missing.begin(), missing.end(), true) != missing.end())
    complete_orthonormal_rows(y, missing);

  // U^T = Theta Q^T ; V = P W where row i of y now holds w_i^T.
  const Matrix ut = theta * qr.Qt;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a_, std::size_t b_) { return sigma[a_] > sigma[b_]; });

  SvdFactors f{Matrix(rows, n), std::vector<double>(n), Matrix(n, n)};
  for (std::size_t c = 0; c < n; ++c) {
    const std::size_t src = order[c];
    f.s[c] = std::ldexp(sigma[src], exponent);
    for (std::size_t r = 0; r < rows; ++r) f.U(r, c) = ut(src, r);
    for (std::size_t kk = 0; kk < n; ++kk) f.V(qr.perm[kk], c) = y(src, kk);
  }
  return f;
}

}  // namespace

SvdFactors svd(const Matrix& m) {
  if (!m.all_finite()) throw DomainError("svd: non-finite input");
  if (m.rows() >= m.cols()) {
    auto f = svd_tall(m);
    canonicalize_signs(f);
    return f;
  }
  auto t = svd_tall(m.transpose());
  SvdFactors f{std::move(t.V), std::move(t.s), std::move(t.U)};
  canonicalize_signs(f);
  return f;
}

}  // namespace gspec
