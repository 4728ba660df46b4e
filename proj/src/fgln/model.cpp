#include "gated_spectra/fgln/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gated_spectra/linalg/decompositions.hpp"
#include "gated_spectra/util/errors.hpp"

namespace gspec {

FglnModel::FglnModel(std::vector<Matrix> weights, std::vector<Gate> gates)
    : weights_(std::move(weights)), gates_(std::move(gates)) {
  if (weights_.empty()) throw DomainError("FglnModel: need at least one layer");
  if (gates_.size() + 1 != weights_.size())
    throw ShapeMismatch("FglnModel: need exactly L - 1 gates");
  for (std::size_t l = 1; l < weights_.size(); ++l) {
    if (weights_[l].cols() != weights_[l - 1].rows())
      throw ShapeMismatch("FglnModel: W_" + std::to_string(l + 1) + " does not chain with W_" +
                          std::to_string(l));
    if (gates_[l - 1].size() != weights_[l - 1].rows())
      throw ShapeMismatch("FglnModel: gate D_" + std::to_string(l) + " has the wrong size");
  }
}

void FglnModel::set_weights(std::vector<Matrix> weights) {
  if (weights.size() != weights_.size()) throw ShapeMismatch("set_weights: depth mismatch");
  for (std::size_t l = 0; l < weights.size(); ++l)
    if (weights[l].rows() != weights_[l].rows() || weights[l].cols() != weights_[l].cols())
      throw ShapeMismatch("set_weights: shape mismatch");
  weights_ = std::move(weights);
}

std::vector<double> FglnModel::gate_factors(std::size_t l) const {
  if (l == 0) return std::vector<double>(weights_.front().cols(), 1.0);
  if (l == depth()) return std::vector<double>(weights_.back().rows(), 1.0);
  return gates_.at(l - 1).factors();
}

Matrix FglnModel::gated_factor(std::size_t l) const {
  if (l < 1 || l > depth()) throw DomainError("gated_factor: index out of range");
  Matrix m = weights_[l - 1];
  if (l < depth()) scale_rows(m, gate_factors(l));
  if (l > 1) scale_cols(m, gate_factors(l - 1));
  return m;
}

Matrix FglnModel::end_to_end() const {
  Matrix j = weights_.front();
  for (std::size_t l = 1; l < depth(); ++l) {
    scale_rows(j, gates_[l - 1].factors());
    j = weights_[l] * j;
  }
  return j;
}

FglnModel::Partial FglnModel::partial_products(std::size_t l) const {
  if (l < 1 || l > depth()) throw DomainError("partial_products: index out of range");
  Partial out;
  // B_l = D_{l-1} W_{l-1} ... D_1 W_1
  out.B = Matrix::identity(weights_.front().cols());
  for (std::size_t k = 1; k < l; ++k) {
    out.B = weights_[k - 1] * out.B;
    scale_rows(out.B, gates_[k - 1].factors());
  }
  // A_l = W_L D_{L-1} ... W_{l+1} D_l
  out.A = Matrix::identity(weights_.back().rows());
  for (std::size_t k = depth(); k > l; --k) {
    out.A = out.A * weights_[k - 1];
    scale_cols(out.A, gates_[k - 2].factors());
  }
  return out;
}

std::vector<Matrix> FglnModel::grad_weights(const Matrix& grad_j) const {
  const std::size_t L = depth();
  if (grad_j.rows() != weights_.back().rows() || grad_j.cols() != weights_.front().cols())
    throw ShapeMismatch("grad_weights: grad_J has the wrong shape");
  // prefix[l-1] = B_l, suffix[l-1] = A_l
  std::vector<Matrix> prefix(L), suffix(L);
  prefix[0] = Matrix::identity(weights_.front().cols());
  for (std::size_t l = 2; l <= L; ++l) {
    prefix[l - 1] = weights_[l - 2] * prefix[l - 2];
    scale_rows(prefix[l - 1], gates_[l - 2].factors());
  }
  suffix[L - 1] = Matrix::identity(weights_.back().rows());
  for (std::size_t l = L - 1; l >= 1; --l) {
    suffix[l - 1] = suffix[l] * weights_[l];
    scale_cols(suffix[l - 1], gates_[l - 1].factors());
  }
  std::vector<Matrix> grads(L);
  for (std::size_t l = 1; l <= L; ++l)
    grads[l - 1] = times_transpose(transpose_times(suffix[l - 1], grad_j), prefix[l - 1]);
  return grads;
}

FglnModel random_fgln(std::size_t n, std::size_t depth, double p, double sigma, RngStream& rng,
                      std::size_t r) {
  if (depth < 1) throw DomainError("random_fgln: depth must be >= 1");
  std::vector<Matrix> weights;
  std::vector<Gate> gates;
  for (std::size_t l = 1; l <= depth; ++l) {
    weights.push_back(sample_ginibre(n, sigma, rng));
    if (l < depth) gates.push_back(r > 1 ? sample_rp_gate(n, r, p, rng) : sample_p_gate(n, p, rng));
  }
  return FglnModel(std::move(weights), std::move(gates));
}

FglnModel balanced_init(std::span<const Gate> gates, std::span<const double> spectrum,
                        RngStream& rng, std::size_t n, double fill_sigma) {
  const std::size_t L = gates.size() + 1;
  const std::size_t m = spectrum.size();
  if (m < 1 || m > n) throw DomainError("balanced_init: need 1 <= len(spectrum) <= n");
  for (double s : spectrum)
    if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("balanced_init: spectrum must be positive");
  for (std::size_t l = 0; l < gates.size(); ++l) {
    if (gates[l].size() != n) throw ShapeMismatch("balanced_init: gate size differs from n");
    if (gates[l].rank() < m)
      throw DomainError("balanced_init: spectrum of length " + std::to_string(m) +
                        " exceeds rank " + std::to_string(gates[l].rank()) + " of gate D_" +
                        std::to_string(l + 1));
  }

  // Frames P_0..P_L (n x m) supported on the gate supports.
  std::vector<Matrix> frames(L + 1);
  for (std::size_t l = 0; l <= L; ++l) {
    std::vector<std::size_t> supp;
    if (l == 0 || l == L) {
      for (std::size_t i = 0; i < n; ++i) supp.push_back(i);
    } else {
      supp = gates[l - 1].support();
    }
    const Matrix q = qr_positive(sample_gaussian(supp.size(), m, 1.0, rng)).Q;
    frames[l] = Matrix(n, m);
    for (std::size_t a = 0; a < supp.size(); ++a)
      for (std::size_t c = 0; c < m; ++c) frames[l](supp[a], c) = q(a, c);
  }
  // Inner rotations R_0..R_L, identity at both ends.
  std::vector<Matrix> rot(L + 1);
  rot[0] = Matrix::identity(m);
  rot[L] = Matrix::identity(m);
  for (std::size_t l = 1; l < L; ++l) rot[l] = sample_haar_orthogonal(m, rng);

  std::vector<double> root(m);
  for (std::size_t i = 0; i < m; ++i) root[i] = std::pow(spectrum[i], 1.0 / static_cast<double>(L));

  std::vector<Matrix> weights;
  for (std::size_t l = 1; l <= L; ++l) {
    Matrix core = rot[l];
    scale_cols(core, root);
    core = times_transpose(core, rot[l - 1]);
    const Matrix ml = times_transpose(frames[l] * core, frames[l - 1]);
    Matrix w = sample_gaussian(n, n, fill_sigma, rng);
    for (std::size_t i = 0; i < n; ++i) {
      const bool row_on = l == L || gates[l - 1][i];
      if (!row_on) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const bool col_on = l == 1 || gates[l - 2][j];
        if (col_on) w(i, j) = ml(i, j);
      }
    }
    weights.push_back(std::move(w));
  }
  return FglnModel(std::move(weights), std::vector<Gate>(gates.begin(), gates.end()));
}

double balancing_drift(const FglnModel& m) {
  double worst = 0.0;
  Matrix prev = m.gated_factor(1);
  for (std::size_t l = 1; l < m.depth(); ++l) {
    Matrix next = m.gated_factor(l + 1);
    const Matrix delta = transpose_times(next, next) - times_transpose(prev, prev);
    worst = std::max(worst, delta.frobenius_norm());
    prev = std::move(next);
  }
  return worst;
}

}  // namespace gspec
