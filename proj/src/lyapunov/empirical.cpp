#include "gated_spectra/lyapunov/empirical.hpp"

#include <algorithm>
#include <cmath>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/util/errors.hpp"
#include "gated_spectra/util/parallel.hpp"

namespace gspec {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

SpectrumSample qr_sweep(std::span<const Matrix> layers, std::size_t k) {
  const std::size_t n = layers.front().cols();
  Matrix frame(n, k);
  for (std::size_t i = 0; i < k; ++i) frame(i, i) = 1.0;
  std::vector<double> acc(k, 0.0);
  std::size_t alive = k;  // indices >= alive have collapsed
  for (const Matrix& m : layers) {
    auto qr = qr_nonnegative(m * frame);
    for (std::size_t i = 0; i < alive; ++i) {
      if (qr.R(i, i) > 0.0) {
        acc[i] += std::log(qr.R(i, i));
      } else {
        alive = i;
        break;
      }
    }
    frame = std::move(qr.Q);
  }
  SpectrumSample out;
  out.depth = layers.size();
  out.log_s.assign(k, kNegInf);
  out.trusted.assign(k, true);
  for (std::size_t i = 0; i < alive; ++i) out.log_s[i] = acc[i];
  // The R_ii sums are ordered only asymptotically.
  std::sort(out.log_s.begin(), out.log_s.end(), std::greater<>());
  return out;
}

}  // namespace

RescaledProduct::RescaledProduct(std::size_t n) : n_(n) {}

void RescaledProduct::push_left(const Matrix& m) {
  if (collapsed_) return;
  if (m.cols() != n_) throw ShapeMismatch("RescaledProduct: layer width mismatch");
  product_ = product_.empty() ? m : m * product_;
  const double f = product_.frobenius_norm();
  if (f == 0.0) {
    collapsed_ = true;
    return;
  }
  product_ *= 1.0 / f;
  log_scale_ += std::log(f);
}

SpectrumSample RescaledProduct::spectrum(std::size_t k, std::size_t depth) const {
  SpectrumSample out;
  out.depth = depth;
  out.scale_accumulator = log_scale_;
  out.log_s.assign(k, kNegInf);
  out.trusted.assign(k, true);
  if (collapsed_) return out;
  if (product_.empty()) throw DomainError("RescaledProduct: no layers pushed");
  const auto f = svd(product_);
  const double top = f.s.empty() ? 0.0 : std::log(f.s[0]);
  for (std::size_t i = 0; i < k && i < f.s.size(); ++i) {
    const double ls = f.s[i] > 0.0 ? std::log(f.s[i]) : kNegInf;
    out.log_s[i] = ls + log_scale_;
    out.trusted[i] = top - ls < kUntrustedLogGap;
  }
  return out;
}

SpectrumSample product_log_spectrum(std::span<const Matrix> layers, std::size_t k,
                                    SpectrumMethod method) {
  if (layers.empty()) throw DomainError("product_log_spectrum: need at least one layer");
  const std::size_t n = layers.front().cols();
  if (k < 1 || k > n) throw DomainError("product_log_spectrum: need 1 <= k <= n");
  for (const auto& m : layers)
    if (m.rows() != n || m.cols() != n) throw ShapeMismatch("product_log_spectrum: layers must be n x n");
  if (method == SpectrumMethod::QrSweep) return qr_sweep(layers, k);
  RescaledProduct prod(n);
  for (const auto& m : layers) prod.push_left(m);
  return prod.spectrum(k, layers.size());
}

SpectrumSample product_log_spectrum(const LayerEnsemble& e, std::size_t depth, std::size_t k,
                                    SpectrumMethod method, RngStream& rng) {
  e.validate();
  if (depth < 1) throw DomainError("product_log_spectrum: depth must be >= 1");
  std::vector<Matrix> layers;
  layers.reserve(depth);
  for (std::size_t l = 0; l < depth; ++l) layers.push_back(sample_layer(e, rng).matrix());
  return product_log_spectrum(layers, k, method);
}

std::vector<ExponentEstimate> empirical_exponents(const LayerEnsemble& e, std::size_t depth,
                                                  std::size_t k, std::size_t trials,
                                                  const RngStream& rng, SpectrumMethod method) {
  if (trials < 2) throw DomainError("empirical_exponents: need trials >= 2");
  std::vector<SpectrumSample> samples(trials);
  parallel_for(trials, [&](std::size_t t) {
    RngStream local = rng.substream(t);
    samples[t] = product_log_spectrum(e, depth, k, method, local);
  });

  std::vector<ExponentEstimate> out(k);
  const double invL = 1.0 / static_cast<double>(depth);
  for (std::size_t i = 0; i < k; ++i) {
    std::vector<double> vals;
    for (const auto& s : samples)
      if (s.trusted[i] && std::isfinite(s.log_s[i])) vals.push_back(s.log_s[i] * invL);
    ExponentEstimate& est = out[i];
    est.depth = depth;
    est.index = i + 1;
    est.trials = vals.size();
    est.flagged = vals.size() < trials;
    if (vals.empty()) {
      est.mean = std::numeric_limits<double>::quiet_NaN();
      est.stderr_ = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= static_cast<double>(vals.size());
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    est.mean = mean;
    est.stderr_ = vals.size() > 1
                      ? std::sqrt(var / static_cast<double>(vals.size() - 1) /
                                  static_cast<double>(vals.size()))
                      : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

std::vector<SeparationPoint> separation_trajectory(const LayerEnsemble& e, std::size_t max_depth,
                                                   std::size_t i, RngStream& rng) {
  e.validate();
  if (i < 1 || i >= e.r)
    throw DomainError("separation_trajectory: need 1 <= i < r");
  RescaledProduct prod(e.n);
  std::vector<SeparationPoint> out;
  out.reserve(max_depth);
  for (std::size_t L = 1; L <= max_depth; ++L) {
    prod.push_left(sample_layer(e, rng).matrix());
    SeparationPoint pt;
    pt.depth = L;
    const auto s = prod.spectrum(i + 1, L);
    pt.log_ratio = s.log_s[i] - s.log_s[i - 1];
    pt.finite = std::isfinite(pt.log_ratio);
    out.push_back(pt);
  }
  return out;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeMismatch("fit_line: size mismatch");
  if (x.size() < 2) throw DomainError("fit_line: need at least two points");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_line: x values are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.points = x.size();
  for (std::size_t i = 0; i < x.size(); ++i)
    f.max_residual = std::max(f.max_residual, std::abs(y[i] - (f.intercept + f.slope * x[i])));
  return f;
}

LineFit fit_separation(std::span<const SeparationPoint> points) {
  std::vector<double> x, y;
  for (const auto& p : points)
    if (p.finite) {
      x.push_back(static_cast<double>(p.depth));
      y.push_back(p.log_ratio);
    }
  return fit_line(x, y);
}

}  // namespace gspec
