#pragma once
// Random layer models: Ginibre weights, Bernoulli gates (optionally
// conditioned on a minimum rank) and Haar orthogonal matrices.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gated_spectra/linalg/matrix.hpp"
#include "gated_spectra/random/rng.hpp"

namespace gspec {

/// Gated layer D W with D an (r, p)-gate and W Ginibre with entry std sigma.
struct LayerEnsemble {
  std::size_t n = 0;
  std::size_t r = 1;
  double p = 1.0;
  double sigma = 1.0;

  /// Throws DomainError unless 1 <= r <= n, 0 < p <= 1 and sigma > 0.
  void validate() const;
};

/// Diagonal 0/1 matrix stored as its diagonal.
class Gate {
 public:
  Gate() = default;
  static Gate identity(std::size_t n);
  static Gate zero(std::size_t n);
  static Gate from_bits(std::vector<std::uint8_t> bits);

  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t rank() const noexcept { return rank_; }
  bool operator[](std::size_t i) const noexcept { return bits_[i] != 0; }
  const std::vector<std::uint8_t>& bits() const noexcept { return bits_; }
  /// Indices of the ones, ascending.
  std::vector<std::size_t> support() const;
  /// Diagonal as 0.0 / 1.0 factors (for scale_rows / scale_cols).
  std::vector<double> factors() const;
  Matrix as_matrix() const;

  friend bool operator==(const Gate&, const Gate&) = default;

 private:
  std::vector<std::uint8_t> bits_;
  std::size_t rank_ = 0;
};

struct GatedLayer {
  Gate gate;
  Matrix weights;
  /// diag(gate) * weights
  Matrix matrix() const;
};

/// rows x cols matrix of i.i.d. N(0, sigma^2) entries.
Matrix sample_gaussian(std::size_t rows, std::size_t cols, double sigma, RngStream& rng);
Matrix sample_ginibre(std::size_t n, double sigma, RngStream& rng);

Gate sample_p_gate(std::size_t n, double p, RngStream& rng);

/// p-gate conditioned on rank >= r, by rejection. Throws NumericalFailure
/// after max_attempts rejections, reporting the exact acceptance probability.
Gate sample_rp_gate(std::size_t n, std::size_t r, double p, RngStream& rng,
                    std::size_t max_attempts = 1'000'000);

/// Same as sample_rp_gate, also reporting how many p-gates were drawn.
Gate sample_rp_gate_counted(std::size_t n, std::size_t r, double p, RngStream& rng,
                            std::size_t& attempts, std::size_t max_attempts = 1'000'000);

/// P(Binomial(n, p) >= r).
double rank_acceptance_probability(std::size_t n, std::size_t r, double p);

/// Gate first, then weights, both from the same stream.
GatedLayer sample_layer(const LayerEnsemble& e, RngStream& rng);

/// Q factor (positive-diagonal convention) of a Ginibre matrix.
Matrix sample_haar_orthogonal(std::size_t n, RngStream& rng);

}  // namespace gspec
