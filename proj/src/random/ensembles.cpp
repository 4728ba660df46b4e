#include "gated_spectra/random/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/linalg/special.hpp"
#include "gated_spectra/util/errors.hpp"

namespace gspec {

void LayerEnsemble::validate() const {
  if (n < 1) throw DomainError("ensemble: n must be >= 1");
  if (r < 1 || r > n) throw DomainError("ensemble: need 1 <= r <= n");
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("ensemble: need 0 < p <= 1");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("ensemble: sigma must be > 0");
}

Gate Gate::identity(std::size_t n) { return from_bits(std::vector<std::uint8_t>(n, 1)); }

Gate Gate::zero(std::size_t n) { return from_bits(std::vector<std::uint8_t>(n, 0)); }

Gate Gate::from_bits(std::vector<std::uint8_t> bits) {
  Gate g;
  for (auto& b : bits) b = b ? 1 : 0;
  g.rank_ = static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
  g.bits_ = std::move(bits);
  return g;
}

std::vector<std::size_t> Gate::support() const {
  std::vector<std::size_t> out;
  out.reserve(rank_);
  for (std::size_t i = 0; i < bits_.size(); ++i)
    if (bits_[i]) out.push_back(i);
  return out;
}

std::vector<double> Gate::factors() const {
  return std::vector<double>(bits_.begin(), bits_.end());
}

Matrix Gate::as_matrix() const {
  const auto f = factors();
  return Matrix::diagonal(f);
}

Matrix GatedLayer::matrix() const {
  Matrix m = weights;
  scale_rows(m, gate.factors());
  return m;
}

Matrix sample_gaussian(std::size_t rows, std::size_t cols, double sigma, RngStream& rng) {
  Matrix m(rows, cols);
  double* d = m.data();
  for (std::size_t i = 0; i < m.size(); ++i) d[i] = sigma * rng.normal();
  return m;
}

Matrix sample_ginibre(std::size_t n, double sigma, RngStream& rng) {
  if (n < 1) throw DomainError("sample_ginibre: n must be >= 1");
  if (!(sigma > 0.0)) throw DomainError("sample_ginibre: sigma must be > 0");
  return sample_gaussian(n, n, sigma, rng);
}

Gate sample_p_gate(std::size_t n, double p, RngStream& rng) {
  if (!(p > 0.0 && p <= 1.0)) throw DomainError("sample_p_gate: need 0 < p <= 1");
  if (p == 1.0) return Gate::identity(n);
  std::vector<std::uint8_t> bits(n);
  for (auto& b : bits) b = rng.uniform() < p ? 1 : 0;
  return Gate::from_bits(std::move(bits));
}

double rank_acceptance_probability(std::size_t n, std::size_t r, double p) {
  if (r == 0) return 1.0;
  if (r > n) return 0.0;
  if (p >= 1.0) return 1.0;
  // sum of terms in log space, largest first for accuracy
  std::vector<double> logs;
  for (std::size_t t = r; t <= n; ++t)
    logs.push_back(log_binomial(static_cast<unsigned>(n), static_cast<unsigned>(t)) +
                   static_cast<double>(t) * std::log(p) +
                   static_cast<double>(n - t) * std::log1p(-p));
  const double top = *std::max_element(logs.begin(), logs.end());
  double acc = 0.0;
  for (double l : logs) acc += std::exp(l - top);
  return std::min(1.0, std::exp(top) * acc);
}

Gate sample_rp_gate_counted(std::size_t n, std::size_t r, double p, RngStream& rng,
                            std::size_t& attempts, std::size_t max_attempts) {
  if (r < 1 || r > n) throw DomainError("sample_rp_gate: need 1 <= r <= n");
  attempts = 0;
  while (attempts < max_attempts) {
    ++attempts;
    Gate g = sample_p_gate(n, p, rng);
    if (g.rank() >= r) return g;
  }
  std::ostringstream msg;
  msg << "sample_rp_gate: no gate of rank >= " << r << " after " << max_attempts
      << " attempts (n=" << n << ", p=" << p
      << ", acceptance probability=" << rank_acceptance_probability(n, r, p) << ")";
  throw NumericalFailure(msg.str());
}

Gate sample_rp_gate(std::size_t n, std::size_t r, double p, RngStream& rng,
                    std::size_t max_attempts) {
  std::size_t attempts = 0;
  return sample_rp_gate_counted(n, r, p, rng, attempts, max_attempts);
}

GatedLayer sample_layer(const LayerEnsemble& e, RngStream& rng) {
  e.validate();
  GatedLayer layer;
  layer.gate = sample_rp_gate(e.n, e.r, e.p, rng);
  layer.weights = sample_ginibre(e.n, e.sigma, rng);
  return layer;
}

Matrix sample_haar_orthogonal(std::size_t n, RngStream& rng) {
  if (n < 1) throw DomainError("sample_haar_orthogonal: n must be >= 1");
  return qr_positive(sample_gaussian(n, n, 1.0, rng)).Q;
}

}  // namespace gspec
