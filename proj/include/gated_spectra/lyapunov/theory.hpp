#pragma once
// Closed-form Lyapunov exponents of products of (r, p, sigma)-layers and the
// Monte Carlo finite-depth coefficients d_i.

#include <cstddef>
#include <vector>

#include "gated_spectra/random/ensembles.hpp"
#include "gated_spectra/random/rng.hpp"

namespace gspec {

/// gamma_i for 1 <= i <= r. Throws DomainError otherwise (the exponent is
/// -infinity for i > r; query that with exponent_is_finite).
double gamma_theory(const LayerEnsemble& e, std::size_t i);

/// Variant without the conditioning normalization (good when r << np).
double gamma_theory_approx(const LayerEnsemble& e, std::size_t i);

/// False for i > r, where the exponent is -infinity.
bool exponent_is_finite(const LayerEnsemble& e, std::size_t i);

/// lambda_i = gamma_1 + ... + gamma_i in partial-sum form; lambda_0 = 0.
double lambda_theory(const LayerEnsemble& e, std::size_t i);

/// E log det(X^T X) for X a t x i matrix with i.i.d. N(0, sigma^2) entries.
double wishart_log_det_mean(std::size_t t, std::size_t i, double sigma);

struct McEstimate {
  double estimate = 0.0;
  double stderr_ = 0.0;
};

/// d_i = -E log|det Omega^{i,i}| with Omega Haar on O(n). i = 0 returns (0, 0)
/// without sampling. Requires i <= n - 1 and trials >= 100.
McEstimate d_coefficient_mc(std::size_t i, std::size_t n, std::size_t trials, RngStream& rng);

/// d_0 .. d_{i_max} from shared samples, plus the standard error of each
/// consecutive difference d_{i-1} - d_i (entry 0 of diff_stderr is 0).
struct DCoefficients {
  std::vector<McEstimate> d;
  std::vector<double> diff_stderr;
};

/// Trial t uses rng.substream(t).
DCoefficients d_coefficients_mc(std::size_t n, std::size_t i_max, std::size_t trials,
                                const RngStream& rng);

/// (psi(n/2) - psi(1/2)) / 2
double d1_closed_form(std::size_t n);

}  // namespace gspec
