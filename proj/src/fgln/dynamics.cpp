#include "gated_spectra/fgln/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/lyapunov/empirical.hpp"
#include "gated_spectra/util/errors.hpp"

namespace gspec {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool is_degenerate(const std::vector<double>& s, std::size_t k) {
  const double tol = kDegenerateGap * s.front();
  if (k > 1 && s[k - 2] - s[k - 1] <= tol) return true;
  if (k < s.size() && s[k - 1] - s[k] <= tol) return true;
  return false;
}

// M_hi ... M_lo (1-based, inclusive); identity when lo > hi.
Matrix chain(std::span<const Matrix> f, std::size_t lo, std::size_t hi, std::size_t n) {
  if (lo > hi) return Matrix::identity(n);
  Matrix out = f[lo - 1];
  for (std::size_t l = lo + 1; l <= hi; ++l) out = f[l - 1] * out;
  return out;
}

// Flip column pairs of (u, v) so that diag(ref^T u) >= 0 on the first k columns.
void align_pair(const Matrix& ref, Matrix& u, Matrix& v, std::size_t k) {
  for (std::size_t c = 0; c < k; ++c) {
    double d = 0.0;
    for (std::size_t i = 0; i < u.rows(); ++i) d += ref(i, c) * u(i, c);
    if (d < 0.0) {
      for (std::size_t i = 0; i < u.rows(); ++i) u(i, c) = -u(i, c);
      for (std::size_t i = 0; i < v.rows(); ++i) v(i, c) = -v(i, c);
    }
  }
}

}  // namespace

double sdot_formula(double s_k, double g_k, std::size_t depth, double delta_k) {
  const double L = static_cast<double>(depth);
  return -std::exp((2.0 + 2.0 / L) * delta_k) * L * std::pow(s_k, 2.0 - 2.0 / L) * g_k;
}

SdotPrediction predicted_sdot_fixed_gates(double delta_k, const Matrix& j, const Matrix& grad_j,
                                          std::size_t depth, std::size_t k) {
  if (j.rows() != grad_j.rows() || j.cols() != grad_j.cols())
    throw ShapeMismatch("predicted_sdot: grad_J shape differs from J");
  if (depth < 1) throw DomainError("predicted_sdot: depth must be >= 1");
  const auto f = svd(j);
  if (k < 1 || k > f.s.size()) throw DomainError("predicted_sdot: k out of range");
  const auto u = f.U.column(k - 1);
  const auto v = f.V.column(k - 1);
  const double g = dot(u, matvec(grad_j, v));
  SdotPrediction out;
  out.value = sdot_formula(f.s[k - 1], g, depth, delta_k);
  out.degenerate = is_degenerate(f.s, k);
  return out;
}

SdotPrediction predicted_sdot_balanced(const Matrix& j, const Matrix& grad_j, std::size_t depth,
                                       std::size_t k) {
  return predicted_sdot_fixed_gates(0.0, j, grad_j, depth, k);
}

std::vector<DepthFitRow> depth_scaling_fit(std::span<const Matrix> factors, std::size_t k_max) {
  if (factors.empty()) throw DomainError("depth_scaling_fit: empty chain");
  const std::size_t n = factors.front().cols();
  if (k_max < 1 || k_max > n) throw DomainError("depth_scaling_fit: need 1 <= k_max <= n");
  std::vector<std::vector<double>> xs(k_max), ys(k_max);
  std::vector<bool> excluded(k_max, false);
  RescaledProduct prod(n);
  for (std::size_t j = 1; j <= factors.size(); ++j) {
    prod.push_left(factors[j - 1]);
    const auto s = prod.spectrum(k_max, j);
    for (std::size_t k = 0; k < k_max; ++k) {
      if (std::isfinite(s.log_s[k]) && s.trusted[k]) {
        xs[k].push_back(static_cast<double>(j));
        ys[k].push_back(s.log_s[k]);
      } else {
        excluded[k] = true;
      }
    }
  }
  std::vector<DepthFitRow> out(k_max);
  for (std::size_t k = 0; k < k_max; ++k) {
    out[k].flagged = excluded[k];
    out[k].points = xs[k].size();
    if (xs[k].size() < 2) {
      out[k].gamma = out[k].delta = out[k].residual = kNaN;
      out[k].flagged = true;
      continue;
    }
    const auto fit = fit_line(xs[k], ys[k]);
    out[k].gamma = fit.slope;
    out[k].delta = fit.intercept;
    out[k].residual = fit.max_residual;
  }
  return out;
}

std::vector<DepthFitRow> depth_scaling_fit(const FglnModel& m, std::size_t k_max) {
  std::vector<Matrix> factors;
  for (std::size_t l = 1; l <= m.depth(); ++l) factors.push_back(m.gated_factor(l));
  return depth_scaling_fit(factors, k_max);
}

DiagnosticValue general_dynamics_diagnostic(std::span<const Matrix> factors,
                                            std::span<const Matrix> velocities, std::size_t k,
                                            double delta_k) {
  const std::size_t L = factors.size();
  if (L == 0 || velocities.size() != L)
    throw ShapeMismatch("general_dynamics_diagnostic: need one velocity per factor");
  const std::size_t n = factors.front().cols();
  for (std::size_t l = 0; l < L; ++l)
    if (!factors[l].is_square() || factors[l].rows() != n || velocities[l].rows() != n ||
        velocities[l].cols() != n)
      throw ShapeMismatch("general_dynamics_diagnostic: factors must be n x n");
  if (k < 1 || k > n) throw DomainError("general_dynamics_diagnostic: k out of range");

  const Matrix j = chain(factors, 1, L, n);
  const auto fj = svd(j);
  DiagnosticValue out;
  out.flagged = is_degenerate(fj.s, k);
  const auto uk = fj.U.column(k - 1);
  const auto vk = fj.V.column(k - 1);

  double sum = 0.0;
  for (std::size_t l = 1; l <= L; ++l) {
    const Matrix p = chain(factors, l + 1, L, n);
    const Matrix q = chain(factors, 1, l - 1, n);
    out.exact += dot(matvec(p.transpose(), uk), matvec(velocities[l - 1], matvec(q, vk)));

    // row k of T^- V_P^T
    std::vector<double> left(n, 0.0);
    if (l == L) {
      left = uk;
    } else {
      auto fp = svd(p);
      align_pair(fj.U, fp.U, fp.V, k);
      for (std::size_t a = 0; a < k; ++a) {
        if (fp.s[a] == 0.0) {
          out.flagged = true;
          continue;
        }
        double ua = 0.0;
        for (std::size_t i = 0; i < n; ++i) ua += fj.U(i, k - 1) * fp.U(i, a);
        const double t = ua * fp.s[a] / fp.s[k - 1];
        for (std::size_t i = 0; i < n; ++i) left[i] += t * fp.V(i, a);
      }
      if (fp.s[k - 1] == 0.0) out.flagged = true;
    }
    // column k of U_Q T^+
    std::vector<double> right(n, 0.0);
    if (l == 1) {
      right = vk;
    } else {
      auto fq = svd(q.transpose());  // V_Q, U_Q swap roles
      align_pair(fj.V, fq.U, fq.V, k);
      for (std::size_t b = 0; b < k; ++b) {
        if (fq.s[b] == 0.0) {
          out.flagged = true;
          continue;
        }
        double vb = 0.0;
        for (std::size_t i = 0; i < n; ++i) vb += fq.U(i, b) * fj.V(i, k - 1);
        const double t = fq.s[b] * vb / fq.s[k - 1];
        for (std::size_t i = 0; i < n; ++i) right[i] += fq.V(i, b) * t;
      }
      if (fq.s[k - 1] == 0.0) out.flagged = true;
    }
    sum += dot(left, matvec(velocities[l - 1], right));
  }
  const double Ld = static_cast<double>(L);
  out.value = std::exp((1.0 + 1.0 / Ld) * delta_k) * std::pow(fj.s[k - 1], 1.0 - 1.0 / Ld) * sum;
  return out;
}

namespace {

void integrate(const std::vector<TrainRecord>& rec, std::size_t k, double C, double expo,
               std::vector<double>& out) {
  out.resize(rec.size());
  out[0] = rec[0].s[k - 1];
  for (std::size_t t = 0; t + 1 < rec.size(); ++t) {
    const double s = out[t];
    const double next = s + C * std::pow(std::max(s, 0.0), expo) * rec[t].g[k - 1];
    out[t + 1] = std::isfinite(next) ? next : std::numeric_limits<double>::infinity();
  }
}

double rmse_of(const std::vector<double>& a, const std::vector<double>& b) {
  double se = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    const double d = a[t] - b[t];
    se += d * d;
  }
  const double v = std::sqrt(se / static_cast<double>(a.size()));
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace

IterativePrediction iterative_prediction(const TrainTrace& trace, std::size_t k) {
  if (trace.records.empty()) throw DomainError("iterative_prediction: empty trace");
  if (k < 1 || k > trace.records.front().s.size())
    throw DomainError("iterative_prediction: k out of range");
  const double expo = 2.0 - 2.0 / static_cast<double>(trace.depth);
  const auto& rec = trace.records;
  IterativePrediction out;
  for (const auto& r : rec) out.observed.push_back(r.s[k - 1]);

  double sxy = 0.0, sxx = 0.0;
  for (std::size_t t = 0; t + 1 < rec.size(); ++t) {
    const double x = std::pow(rec[t].s[k - 1], expo) * rec[t].g[k - 1];
    sxy += (rec[t + 1].s[k - 1] - rec[t].s[k - 1]) * x;
    sxx += x * x;
  }
  out.degenerate = !(sxx > 0.0) || sxy == 0.0;
  out.C_increment = sxx > 0.0 ? sxy / sxx : 0.0;

  std::vector<double> buf;
  auto cost = [&](double C) {
    integrate(rec, k, C, expo, buf);
    return rmse_of(buf, out.observed);
  };

  double best_c = 0.0, best = cost(0.0);
  if (!out.degenerate) {
    // coarse scan over log|C| around the increment fit, then golden section
    const double base = out.C_increment;
    const double step = 0.02;
    int best_i = 0;
    bool found = false;
    for (int i = -200; i <= 200; ++i) {
      const double c = base * std::pow(10.0, i * step);
      const double v = cost(c);
      if (v < best) {
        best = v;
        best_c = c;
        best_i = i;
        found = true;
      }
    }
    if (found) {
      double a = (best_i - 1) * step, b = (best_i + 1) * step;
      const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
      double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
      double f1 = cost(base * std::pow(10.0, x1)), f2 = cost(base * std::pow(10.0, x2));
      for (int it = 0; it < 60 && b - a > 1e-10; ++it) {
        if (f1 < f2) {
          b = x2; x2 = x1; f2 = f1;
          x1 = b - phi * (b - a);
          f1 = cost(base * std::pow(10.0, x1));
        } else {
          a = x1; x1 = x2; f1 = f2;
          x2 = a + phi * (b - a);
          f2 = cost(base * std::pow(10.0, x2));
        }
      }
      const double c = base * std::pow(10.0, 0.5 * (a + b));
      const double v = cost(c);
      if (v < best) {
        best = v;
        best_c = c;
      }
    }
  }
  out.C = best_c;
  integrate(rec, k, out.C, expo, out.predicted);
  out.rmse = rmse_of(out.predicted, out.observed);
  const auto [lo, hi] = std::minmax_element(out.observed.begin(), out.observed.end());
  out.range = *hi - *lo;
  return out;
}

}  // namespace gspec
