#include "gated_spectra/linalg/decompositions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "gated_spectra/simd/kernels.hpp"
#include "gated_spectra/util/errors.hpp"
#include "householder.hpp"

namespace gspec {
namespace detail {

HouseholderQr householder_qr(const Matrix& m, bool pivot) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  if (rows < cols) throw ShapeMismatch("householder_qr: needs rows >= cols");
  const auto& k = simd::kernels();

  Matrix w = m.transpose();  // row j = column j of m
  std::vector<std::size_t> perm(cols);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::vector<double>> reflectors(cols);
  std::vector<double> betas(cols, 0.0);

  for (std::size_t step = 0; step < cols; ++step) {
    const std::size_t len = rows - step;
    if (pivot) {
      std::size_t best = step;
      double best_norm = -1.0;
      for (std::size_t j = step; j < cols; ++j) {
        const double* wj = w.row(j).data() + step;
        const double nrm = k.dot(wj, wj, len);
        if (nrm > best_norm) {
          best_norm = nrm;
          best = j;
        }
      }
      if (best != step) {
        std::swap_ranges(w.row(step).begin(), w.row(step).end(), w.row(best).begin());
        std::swap(perm[step], perm[best]);
      }
    }
    double* x = w.row(step).data() + step;
    const double xnorm = std::sqrt(k.dot(x, x, len));
    if (xnorm == 0.0) continue;
    const double alpha = x[0] >= 0.0 ? -xnorm : xnorm;
    std::vector<double> v(x, x + len);
    v[0] -= alpha;
    const double beta = k.dot(v.data(), v.data(), len);
    x[0] = alpha;
    std::fill(x + 1, x + len, 0.0);
    if (beta == 0.0) continue;
    for (std::size_t j = step + 1; j < cols; ++j) {
      double* wj = w.row(j).data() + step;
      const double f = 2.0 * k.dot(v.data(), wj, len) / beta;
      k.axpy(-f, v.data(), wj, len);
    }
    reflectors[step] = std::move(v);
    betas[step] = beta;
  }

  HouseholderQr out{Matrix(cols, rows), Matrix(cols, cols), std::move(perm)};
  for (std::size_t i = 0; i < cols; ++i)
    for (std::size_t j = i; j < cols; ++j) out.R(i, j) = w(j, i);

  for (std::size_t j = 0; j < cols; ++j) {
    double* q = out.Qt.row(j).data();
    q[j] = 1.0;
    for (std::size_t step = std::min(j + 1, cols); step-- > 0;) {
      if (betas[step] == 0.0) continue;
      const std::size_t len = rows - step;
      const auto& v = reflectors[step];
      const double f = 2.0 * k.dot(v.data(), q + step, len) / betas[step];
      k.axpy(-f, v.data(), q + step, len);
    }
  }

  for (std::size_t i = 0; i < cols; ++i) {
    if (out.R(i, i) < 0.0) {
      k.scale(-1.0, out.R.row(i).data(), cols);
      k.scale(-1.0, out.Qt.row(i).data(), rows);
    }
  }
  return out;
}

}  // namespace detail

namespace {

void require_square(const Matrix& m, const char* what) {
  if (!m.is_square()) throw ShapeMismatch(std::string(what) + ": matrix must be square");
}

// Partial-pivoting LU; returns pivots (diagonal of U) and the permutation sign.
struct LuDiagonal {
  std::vector<double> pivots;
  int sign = 1;
  bool singular = false;
};

LuDiagonal lu_diagonal(const Matrix& m) {
  require_square(m, "lu");
  const std::size_t n = m.rows();
  Matrix a = m;
  LuDiagonal out;
  out.pivots.resize(n);
  const auto& k = simd::kernels();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    double best = std::abs(a(c, c));
    for (std::size_t r = c + 1; r < n; ++r) {
      if (std::abs(a(r, c)) > best) {
        best = std::abs(a(r, c));
        p = r;
      }
    }
    if (best == 0.0) {
      out.singular = true;
      out.pivots[c] = 0.0;
      continue;
    }
    if (p != c) {
      std::swap_ranges(a.row(c).begin(), a.row(c).end(), a.row(p).begin());
      out.sign = -out.sign;
    }
    const double piv = a(c, c);
    out.pivots[c] = piv;
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a(r, c) / piv;
      if (f != 0.0) k.axpy(-f, a.row(c).data() + c, a.row(r).data() + c, n - c);
    }
  }
  return out;
}

}  // namespace

Matrix sign_align(const Matrix& reference, const Matrix& target) {
  if (reference.rows() != target.rows() || reference.cols() != target.cols())
    throw ShapeMismatch("sign_align: reference and target shapes differ");
  Matrix out = target;
  for (std::size_t j = 0; j < out.cols(); ++j) {
    double d = 0.0;
    for (std::size_t i = 0; i < out.rows(); ++i) d += reference(i, j) * target(i, j);
    if (d < 0.0)
      for (std::size_t i = 0; i < out.rows(); ++i) out(i, j) = -out(i, j);
  }
  return out;
}

QrFactors qr_nonnegative(const Matrix& m) {
  auto h = detail::householder_qr(m, false);
  return {h.Qt.transpose(), std::move(h.R)};
}

QrFactors qr_positive(const Matrix& m) {
  if (m.rows() < m.cols()) throw ShapeMismatch("qr_positive: needs rows >= cols");
  if (!m.all_finite()) throw DomainError("qr_positive: non-finite input");
  auto f = qr_nonnegative(m);
  const double threshold = 1e-13 * m.max_abs();
  for (std::size_t i = 0; i < f.R.rows(); ++i) {
    if (!(f.R(i, i) > threshold))
      throw RankDeficient("qr_positive: |R_" + std::to_string(i + 1) + std::to_string(i + 1) +
                          "| below 1e-13 * max|M|; input is rank deficient");
  }
  return f;
}

CholeskyUnitFactors cholesky_unit(const Matrix& c) {
  require_square(c, "cholesky_unit");
  const std::size_t n = c.rows();
  const double scale = c.max_abs();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(c(i, j) - c(j, i)) > 1e-10 * std::max(scale, 1e-300))
        throw DomainError("cholesky_unit: input is not symmetric");

  CholeskyUnitFactors f{Matrix::identity(n), std::vector<double>(n)};
  for (std::size_t j = 0; j < n; ++j) {
    double d = c(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= f.T(j, k) * f.T(j, k) * f.Sigma[k];
    if (!(d > 0.0))
      throw NotPositiveDefinite("cholesky_unit: non-positive pivot at index " +
                                std::to_string(j + 1));
    f.Sigma[j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = c(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= f.T(i, k) * f.T(j, k) * f.Sigma[k];
      f.T(i, j) = v / d;
    }
  }
  return f;
}

double log_abs_det(const Matrix& m) {
  require_square(m, "log_abs_det");
  const auto lu = lu_diagonal(m);
  if (lu.singular) return -std::numeric_limits<double>::infinity();
  double acc = 0.0;
  for (double p : lu.pivots) acc += std::log(std::abs(p));
  return acc;
}

double determinant(const Matrix& m) {
  require_square(m, "determinant");
  const auto lu = lu_diagonal(m);
  if (lu.singular) return 0.0;
  double acc = lu.sign;
  for (double p : lu.pivots) acc *= p;
  return acc;
}

Matrix unit_lower_inverse(const Matrix& t) {
  require_square(t, "unit_lower_inverse");
  const std::size_t n = t.rows();
  Matrix inv = Matrix::identity(n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = 0.0;
      for (std::size_t k = j; k < i; ++k) v -= t(i, k) * inv(k, j);
      inv(i, j) = v;
    }
  return inv;
}

double orthonormality_defect(const Matrix& q) {
  const Matrix g = transpose_times(q, q);
  return max_abs_diff(g, Matrix::identity(g.rows()));
}

}  // namespace gspec
