#pragma once
// Empirical log-singular values of deep gated products.
//
// Naive products of 100 layers at sigma = 1/sqrt(n) leave the double range,
// so two stabilized estimators are provided:
//   RescaledSvd  keeps the explicit product normalized to unit Frobenius
//                norm and adds the log of each divisor to a scale
//                accumulator. Exact up to rounding, but the final SVD only
//                resolves about 30 nats below s_1; deeper indices are
//                reported as untrusted.
//   QrSweep      propagates an n x k orthonormal frame and accumulates
//                log R_ii. Matches the exponents asymptotically only.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "gated_spectra/linalg/matrix.hpp"
#include "gated_spectra/random/ensembles.hpp"
#include "gated_spectra/random/rng.hpp"

namespace gspec {

enum class SpectrumMethod { RescaledSvd, QrSweep };

/// log(s_1 / s_i) at or beyond which RescaledSvd flags index i.
inline constexpr double kUntrustedLogGap = 30.0;

struct SpectrumSample {
  std::size_t depth = 0;
  /// log s_1 >= log s_2 >= ...; -infinity for exact zeros.
  std::vector<double> log_s;
  std::vector<bool> trusted;
  double scale_accumulator = 0.0;
};

/// Running product M_L ... M_1 with unit Frobenius norm plus its log scale.
class RescaledProduct {
 public:
  explicit RescaledProduct(std::size_t n);
  /// product <- m * product, then renormalize.
  void push_left(const Matrix& m);
  const Matrix& normalized() const noexcept { return product_; }
  double log_scale() const noexcept { return log_scale_; }
  /// -infinity once the product is exactly zero.
  bool collapsed() const noexcept { return collapsed_; }
  /// Top-k log singular values of the true product.
  SpectrumSample spectrum(std::size_t k, std::size_t depth) const;

 private:
  std::size_t n_;
  Matrix product_;
  double log_scale_ = 0.0;
  bool collapsed_ = false;
};

/// One sample of the ordered log spectrum of J_L = (D_L W_L) ... (D_1 W_1),
/// layers drawn from rng in order.
SpectrumSample product_log_spectrum(const LayerEnsemble& e, std::size_t depth, std::size_t k,
                                    SpectrumMethod method, RngStream& rng);

/// Same on explicit layer matrices, applied first to last.
SpectrumSample product_log_spectrum(std::span<const Matrix> layers, std::size_t k,
                                    SpectrumMethod method);

struct ExponentEstimate {
  std::size_t depth = 0;
  std::size_t index = 0;  // 1-based
  double mean = 0.0;
  double stderr_ = 0.0;
  /// trials that contributed (untrusted or -infinity samples are dropped)
  std::size_t trials = 0;
  /// set when any trial was dropped
  bool flagged = false;
};

/// Mean and standard error of (1/L) log s_{i,L}, i = 1..k, over trials;
/// trial t draws from rng.substream(t).
std::vector<ExponentEstimate> empirical_exponents(const LayerEnsemble& e, std::size_t depth,
                                                  std::size_t k, std::size_t trials,
                                                  const RngStream& rng,
                                                  SpectrumMethod method = SpectrumMethod::RescaledSvd);

struct SeparationPoint {
  std::size_t depth = 0;
  double log_ratio = 0.0;  // log(s_{i+1} / s_i); -infinity when s_{i+1} = 0
  bool finite = true;
};

/// log(s_{i+1,L} / s_{i,L}) for L = 1..max_depth along one trajectory.
std::vector<SeparationPoint> separation_trajectory(const LayerEnsemble& e, std::size_t max_depth,
                                                   std::size_t i, RngStream& rng);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double max_residual = 0.0;
  std::size_t points = 0;
};

/// Least-squares line through (x, y); needs two distinct x values.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// Least-squares slope over the finite points of a trajectory.
LineFit fit_separation(std::span<const SeparationPoint> points);

}  // namespace gspec
