#include "gated_spectra/alignment/alignment.hpp"

#include <algorithm>
#include <cmath>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/lyapunov/empirical.hpp"
#include "gated_spectra/util/errors.hpp"

namespace gspec {
namespace {

constexpr double kOrthonormalTol = 1e-8;

double sup_identity_deviation(const Matrix& r, std::size_t k) {
  double dev = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j)
      dev = std::max(dev, std::abs(r(i, j) - (i == j ? 1.0 : 0.0)));
  return dev;
}

}  // namespace

RotationMatrix rotation(const Matrix& u_ref, const Matrix& u_target, std::size_t r) {
  if (u_ref.rows() != u_target.rows() || u_ref.cols() != u_target.cols())
    throw ShapeMismatch("rotation: bases must have the same shape");
  if (r < 1 || r > u_ref.cols()) throw DomainError("rotation: need 1 <= r <= cols");
  if (orthonormality_defect(u_ref) > kOrthonormalTol ||
      orthonormality_defect(u_target) > kOrthonormalTol)
    throw DomainError("rotation: inputs must have orthonormal columns");
  RotationMatrix out;
  out.R = transpose_times(u_ref, sign_align(u_ref, u_target));
  out.r = r;
  out.sup_deviation = sup_identity_deviation(out.R, r);
  return out;
}

double diagonal_correlation(const Matrix& a) {
  if (!a.is_square() || a.rows() == 0) throw ShapeMismatch("diagonal_correlation: need a square matrix");
  const std::size_t n = a.rows();
  // Moments of the index pair (X, Y) under |A|.
  double m = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i + 1);
    for (std::size_t j = 0; j < n; ++j) {
      const double w = std::abs(a(i, j));
      if (w == 0.0) continue;
      const double y = static_cast<double>(j + 1);
      m += w;
      sx += w * x;
      sy += w * y;
      sxx += w * x * x;
      syy += w * y * y;
      sxy += w * x * y;
    }
  }
  if (m == 0.0) throw DomainError("diagonal_correlation: zero matrix");
  const double cov = m * sxy - sx * sy;
  const double vx = m * sxx - sx * sx;
  const double vy = m * syy - sy * sy;
  if (!(vx > 0.0) || !(vy > 0.0))
    throw DomainError("diagonal_correlation: mass confined to a single row or column");
  const double rho = cov / std::sqrt(vx * vy);
  return std::clamp(rho, -1.0, 1.0);
}

AlignmentPrediction predict_alignment(const Matrix& b, std::size_t r) {
  if (r < 1 || r > b.rows()) throw DomainError("predict_alignment: need 1 <= r <= rows(B)");
  const Matrix c = times_transpose(b, b).leading(r);
  auto chol = cholesky_unit(c);
  AlignmentPrediction out;
  out.T = std::move(chol.T);
  out.Sigma = std::move(chol.Sigma);
  out.ell.resize(r);
  double prev = 0.0;  // log det C^{0,0}
  for (std::size_t i = 1; i <= r; ++i) {
    const double cur = log_abs_det(c.leading(i));
    out.ell[i - 1] = std::exp(cur - prev);
    prev = cur;
  }
  return out;
}

std::vector<AlignmentReport> synthetic_alignment_sweep(const Matrix& b, std::size_t r,
                                                       std::span<const double> taus) {
  if (!b.is_square()) throw ShapeMismatch("synthetic_alignment_sweep: B must be square");
  const std::size_t n = b.rows();
  if (r < 1 || r >= n) throw DomainError("synthetic_alignment_sweep: need 1 <= r <= n - 1");
  const auto pred = predict_alignment(b, r);
  const Matrix t_inv = unit_lower_inverse(pred.T);

  std::vector<AlignmentReport> out;
  for (double tau : taus) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = std::exp(static_cast<double>(n - 1 - i) * tau);
    Matrix j = b;
    scale_rows(j, s);
    const auto fj = svd(j);
    // U_A = I, so R = sign-aligned U_J
    const auto rot = rotation(Matrix::identity(n), fj.U, r);
    const Matrix& R = rot.R;

    AlignmentReport rep;
    rep.parameter = tau;
    rep.sup_deviation = rot.sup_deviation;
    for (std::size_t a = 0; a < r; ++a) {
      for (std::size_t c = 0; c < r; ++c) {
        if (a == c) continue;
        OffDiagonalEntry e;
        e.i = a + 1;
        e.j = c + 1;
        e.observed = R(a, c);
        e.predicted = a > c ? pred.T(a, c) * s[a] / s[c] : t_inv(c, a) * s[c] / s[a];
        rep.off_diagonal.push_back(e);
        const double lower_form = R(a, c) * s[c] / s[a];
        const double upper_form = R(a, c) * s[a] / s[c];
        rep.lower_limit_error = std::max(rep.lower_limit_error,
                                         std::abs(lower_form - (a > c ? pred.T(a, c) : 0.0)));
        rep.upper_limit_error = std::max(rep.upper_limit_error,
                                         std::abs(upper_form - (a < c ? t_inv(c, a) : 0.0)));
        if (a < c) rep.strict_upper_max = std::max(rep.strict_upper_max, std::abs(lower_form));
      }
      rep.lower_limit_error = std::max(rep.lower_limit_error, std::abs(R(a, a) - 1.0));
      rep.upper_limit_error = std::max(rep.upper_limit_error, std::abs(R(a, a) - 1.0));
      const double ratio = fj.s[a] / s[a];
      rep.sigma_limit_error = std::max(rep.sigma_limit_error, std::abs(ratio * ratio - pred.Sigma[a]));
    }
    rep.diag_corr = diagonal_correlation(R.leading(r));
    out.push_back(std::move(rep));
  }
  return out;
}

ProductAlignment product_alignment_report(std::span<const GatedLayer> layers, std::size_t split,
                                          std::size_t block) {
  const std::size_t L = layers.size();
  if (split < 1 || split >= L) throw DomainError("product_alignment_report: need 1 <= split < L");
  const std::size_t n = layers.front().weights.rows();
  block = std::min(block, n);

  // Both products are renormalized; only directions and ratios are used.
  RescaledProduct a_prod(n);
  for (std::size_t l = split; l < L; ++l) a_prod.push_left(layers[l].matrix());
  RescaledProduct j_prod(n);
  for (std::size_t l = 0; l < split; ++l) j_prod.push_left(layers[l].matrix());
  const Matrix& a = a_prod.normalized();
  const Matrix j = a * j_prod.normalized();

  const auto fa = svd(a);
  const auto fj = svd(j);
  ProductAlignment out;
  out.split = split;
  const Matrix uu = transpose_times(fj.U, fa.U);
  out.diag_corr_uu = diagonal_correlation(uu);
  out.diag_corr_uu_block = diagonal_correlation(uu.leading(block));
  const Matrix ua = transpose_times(fj.U, a);
  out.diag_corr_uaau = diagonal_correlation(times_transpose(ua, ua).leading(block));
  out.diag_corr_aa = diagonal_correlation(times_transpose(a, a).leading(block));
  out.sup_deviation = rotation(fj.U, fa.U, block).sup_deviation;
  return out;
}

}  // namespace gspec
