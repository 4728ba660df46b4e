#pragma once
// Fixed-Gates Linear Network J = W_L D_{L-1} W_{L-1} ... D_1 W_1.
//
// Gates are fixed for the lifetime of a model; only the weights move. With
// D_0 = D_L = I the gated factors are M_l = D_l W_l D_{l-1}, so J = M_L ... M_1.

#include <cstddef>
#include <span>
#include <vector>

#include "gated_spectra/linalg/matrix.hpp"
#include "gated_spectra/random/ensembles.hpp"

namespace gspec {

class FglnModel {
 public:
  /// weights[l-1] = W_l (n_l x n_{l-1}); gates[l-1] = D_l for l = 1..L-1.
  /// Throws ShapeMismatch on incompatible shapes.
  FglnModel(std::vector<Matrix> weights, std::vector<Gate> gates);

  std::size_t depth() const noexcept { return weights_.size(); }
  const std::vector<Matrix>& weights() const noexcept { return weights_; }
  const std::vector<Gate>& gates() const noexcept { return gates_; }
  /// W_l, 1-based.
  const Matrix& weight(std::size_t l) const { return weights_.at(l - 1); }
  /// Replace all weights at once (same shapes). Used by the trainer.
  void set_weights(std::vector<Matrix> weights);

  /// Diagonal of D_l as 0/1 factors, l = 0..L (identity at both ends).
  std::vector<double> gate_factors(std::size_t l) const;

  Matrix end_to_end() const;
  /// M_l = D_l W_l D_{l-1}, 1-based.
  Matrix gated_factor(std::size_t l) const;

  struct Partial {
    Matrix A;  // W_L D_{L-1} ... W_{l+1} D_l
    Matrix B;  // D_{l-1} W_{l-1} ... D_1 W_1
  };
  /// 1 <= l <= L. A_L and B_1 are identities.
  Partial partial_products(std::size_t l) const;

  /// Gradient of the loss with respect to every W_l given dLoss/dJ:
  /// grad W_l = A_l^T grad_J B_l^T.
  std::vector<Matrix> grad_weights(const Matrix& grad_j) const;

 private:
  std::vector<Matrix> weights_;
  std::vector<Gate> gates_;
};

/// L layers n x n with Ginibre weights (std sigma) and i.i.d. p-gates in
/// between (unconditioned unless r > 1).
FglnModel random_fgln(std::size_t n, std::size_t depth, double p, double sigma, RngStream& rng,
                      std::size_t r = 1);

/// Balanced initialization with end-to-end singular values `spectrum`
/// (length m <= every gate rank): M_l = P_l A_l P_{l-1}^T with P_l an n x m
/// frame on the support of D_l and A_l = R_l diag(spectrum^{1/L}) R_{l-1}^T.
/// Weight entries outside the gated block are fresh Ginibre draws with std
/// fill_sigma. Throws DomainError when m exceeds a gate rank.
FglnModel balanced_init(std::span<const Gate> gates, std::span<const double> spectrum,
                        RngStream& rng, std::size_t n, double fill_sigma);

/// max_l ||M_{l+1}^T M_{l+1} - M_l M_l^T||_F over l = 1..L-1 (0 when L = 1).
double balancing_drift(const FglnModel& m);

}  // namespace gspec
