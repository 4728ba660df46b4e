#pragma once
// Predicted singular-value dynamics and the diagnostics that test their
// assumptions.

#include <cstddef>
#include <span>
#include <vector>

#include "gated_spectra/fgln/model.hpp"
#include "gated_spectra/fgln/training.hpp"
#include "gated_spectra/linalg/matrix.hpp"

namespace gspec {

/// Relative gap (to s_1) below which s_k counts as degenerate.
inline constexpr double kDegenerateGap = 1e-8;

struct SdotPrediction {
  double value = 0.0;
  bool degenerate = false;
};

/// -L s_k^{2-2/L} <grad_J, u_k v_k^T> (balanced networks). k is 1-based.
SdotPrediction predicted_sdot_balanced(const Matrix& j, const Matrix& grad_j, std::size_t depth,
                                       std::size_t k);

/// -e^{(2+2/L) delta_k} L s_k^{2-2/L} <grad_J, u_k v_k^T>.
SdotPrediction predicted_sdot_fixed_gates(double delta_k, const Matrix& j, const Matrix& grad_j,
                                          std::size_t depth, std::size_t k);

/// Same two formulas from precomputed quantities.
double sdot_formula(double s_k, double g_k, std::size_t depth, double delta_k);

/// Affine fit of log s_k(M_j ... M_1) against j = 1..L for k = 1..k_max.
std::vector<DepthFitRow> depth_scaling_fit(const FglnModel& m, std::size_t k_max);

/// Depth fit of an explicit chain of square factors (first applied first).
std::vector<DepthFitRow> depth_scaling_fit(std::span<const Matrix> factors, std::size_t k_max);

struct DiagnosticValue {
  double value = 0.0;  // first-order prediction of ds_k/dt
  double exact = 0.0;  // sum_l (U^T M_{l+1:L} dM_l M_{1:l-1} V)_kk
  bool flagged = false;
};

/// Generic chain J = M_L ... M_1 with velocities dM_l: the triangular
/// alignment factors are measured on the top k x k blocks and the sum is
/// scaled by e^{(1+1/L) delta_k} s_k^{1-1/L}.
DiagnosticValue general_dynamics_diagnostic(std::span<const Matrix> factors,
                                            std::span<const Matrix> velocities, std::size_t k,
                                            double delta_k);

struct IterativePrediction {
  double C = 0.0;
  /// least-squares fit on one-step increments; used to seed the search for C
  double C_increment = 0.0;
  std::vector<double> predicted;
  std::vector<double> observed;
  double rmse = 0.0;
  double range = 0.0;
  /// all drive terms vanish; C is undetermined
  bool degenerate = false;
};

/// Integrates s(t+1) = s(t) + C s(t)^{2-2/L} g(t) from s(0) along the trace,
/// with C chosen to minimise the RMSE between the integrated and observed curves.
IterativePrediction iterative_prediction(const TrainTrace& trace, std::size_t k);

}  // namespace gspec
