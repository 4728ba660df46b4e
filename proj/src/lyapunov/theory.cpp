#include "gated_spectra/lyapunov/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/linalg/special.hpp"
#include "gated_spectra/util/errors.hpp"
#include "gated_spectra/util/parallel.hpp"

namespace gspec {
namespace {

// Binomial weights P(rank = t) for t = r..n, normalized by their largest
// entry. At p = 1 only t = n carries mass.
std::vector<double> rank_weights(const LayerEnsemble& e) {
  std::vector<double> w(e.n - e.r + 1, 0.0);
  if (e.p >= 1.0) {
    w.back() = 1.0;
    return w;
  }
  std::vector<double> logs(w.size());
  for (std::size_t t = e.r; t <= e.n; ++t)
    logs[t - e.r] = log_binomial(static_cast<unsigned>(e.n), static_cast<unsigned>(t)) +
                    static_cast<double>(t) * std::log(e.p) +
                    static_cast<double>(e.n - t) * std::log1p(-e.p);
  const double top = *std::max_element(logs.begin(), logs.end());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::exp(logs[k] - top);
  return w;
}

double log_scale_of_weights(const LayerEnsemble& e) {
  if (e.p >= 1.0) return 0.0;
  double top = -INFINITY;
  for (std::size_t t = e.r; t <= e.n; ++t)
    top = std::max(top, log_binomial(static_cast<unsigned>(e.n), static_cast<unsigned>(t)) +
                            static_cast<double>(t) * std::log(e.p) +
                            static_cast<double>(e.n - t) * std::log1p(-e.p));
  return top;
}

void check_index(const LayerEnsemble& e, std::size_t i, const char* who) {
  e.validate();
  if (i < 1 || i > e.r)
    throw DomainError(std::string(who) + ": index " + std::to_string(i) +
                      " outside 1..r=" + std::to_string(e.r));
}

// sum_t w_t f(t) / sum_t w_t
template <class F>
double weighted_mean(const LayerEnsemble& e, F&& f) {
  const auto w = rank_weights(e);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = e.r; t <= e.n; ++t) {
    const double wt = w[t - e.r];
    if (wt == 0.0) continue;
    num += wt * f(t);
    den += wt;
  }
  return num / den;
}

}  // namespace

bool exponent_is_finite(const LayerEnsemble& e, std::size_t i) {
  e.validate();
  return i >= 1 && i <= e.r;
}

double gamma_theory(const LayerEnsemble& e, std::size_t i) {
  check_index(e, i, "gamma_theory");
  const double mean = weighted_mean(e, [&](std::size_t t) {
    return digamma(static_cast<double>(t - i + 1) / 2.0);
  });
  return std::log(std::sqrt(2.0) * e.sigma) + 0.5 * mean;
}

double gamma_theory_approx(const LayerEnsemble& e, std::size_t i) {
  check_index(e, i, "gamma_theory_approx");
  const auto w = rank_weights(e);
  const double scale = std::exp(log_scale_of_weights(e));
  double num = 0.0;
  for (std::size_t t = e.r; t <= e.n; ++t)
    num += w[t - e.r] * digamma(static_cast<double>(t - i + 1) / 2.0);
  return std::log(std::sqrt(2.0) * e.sigma) + 0.5 * scale * num;
}

double lambda_theory(const LayerEnsemble& e, std::size_t i) {
  if (i == 0) return 0.0;
  check_index(e, i, "lambda_theory");
  const double mean = weighted_mean(e, [&](std::size_t t) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= i; ++k) acc += digamma(static_cast<double>(t - k + 1) / 2.0);
    return acc;
  });
  return 0.5 * static_cast<double>(i) * std::log(2.0 * e.sigma * e.sigma) + 0.5 * mean;
}

double wishart_log_det_mean(std::size_t t, std::size_t i, double sigma) {
  if (i > t) throw DomainError("wishart_log_det_mean: need i <= t");
  double acc = static_cast<double>(i) * std::log(2.0 * sigma * sigma);
  for (std::size_t k = 1; k <= i; ++k) acc += digamma(static_cast<double>(t - k + 1) / 2.0);
  return acc;
}

double d1_closed_form(std::size_t n) {
  return 0.5 * (digamma(static_cast<double>(n) / 2.0) - digamma(0.5));
}

DCoefficients d_coefficients_mc(std::size_t n, std::size_t i_max, std::size_t trials,
                                const RngStream& rng) {
  if (n < 2) throw DomainError("d_coefficients_mc: need n >= 2");
  if (i_max > n - 1) throw DomainError("d_coefficients_mc: need i_max <= n - 1");
  if (trials < 2) throw DomainError("d_coefficients_mc: need trials >= 2");

  // samples[t][i] = log|det Omega^{i,i}| for i = 1..i_max
  std::vector<std::vector<double>> samples(trials, std::vector<double>(i_max + 1, 0.0));
  if (i_max > 0) {
    parallel_for(trials, [&](std::size_t t) {
      RngStream local = rng.substream(t);
      // The first i_max columns of a Haar matrix: Q of an n x i_max Gaussian.
      const Matrix q = qr_positive(sample_gaussian(n, i_max, 1.0, local)).Q;
      for (std::size_t i = 1; i <= i_max; ++i) samples[t][i] = log_abs_det(q.block(0, 0, i, i));
    });
  }

  DCoefficients out;
  out.d.resize(i_max + 1);
  out.diff_stderr.assign(i_max + 1, 0.0);
  const double nt = static_cast<double>(trials);
  for (std::size_t i = 1; i <= i_max; ++i) {
    double mean = 0.0, mean_diff = 0.0;
    for (const auto& s : samples) {
      mean += s[i];
      mean_diff += s[i] - s[i - 1];
    }
    mean /= nt;
    mean_diff /= nt;
    double var = 0.0, var_diff = 0.0;
    for (const auto& s : samples) {
      var += (s[i] - mean) * (s[i] - mean);
      const double dd = s[i] - s[i - 1] - mean_diff;
      var_diff += dd * dd;
    }
    out.d[i] = {-mean, std::sqrt(var / (nt - 1.0) / nt)};
    out.diff_stderr[i] = std::sqrt(var_diff / (nt - 1.0) / nt);
  }
  return out;
}

McEstimate d_coefficient_mc(std::size_t i, std::size_t n, std::size_t trials, RngStream& rng) {
  if (i == 0) return {0.0, 0.0};
  if (i > n - 1 || n < 2) throw DomainError("d_coefficient_mc: need 1 <= i <= n - 1");
  if (trials < 100) throw DomainError("d_coefficient_mc: need trials >= 100");
  const RngStream base = rng.substream(rng.next_u64());
  const auto all = d_coefficients_mc(n, i, trials, base);
  return all.d[i];
}

}  // namespace gspec
