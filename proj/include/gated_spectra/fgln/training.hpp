#pragma once
// Plain gradient descent (explicit Euler on the gradient flow) with a trace
// of the end-to-end spectrum.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "gated_spectra/fgln/model.hpp"
#include "gated_spectra/linalg/matrix.hpp"
#include "gated_spectra/util/errors.hpp"

namespace gspec {

enum class LossKind {
  SquaredToTarget,  // 0.5 ||J - T||_F^2
  SquaredOnDataset  // (1/2N) ||J X - T X||_F^2 = 0.5 tr((J-T) Sigma (J-T)^T)
};

/// Regression onto a fixed linear map of rank k.
struct SyntheticTask {
  std::size_t n = 0;
  std::size_t rank = 0;
  std::size_t samples = 0;
  Matrix target;      // n x n, rank exactly `rank`
  Matrix covariance;  // X X^T / N (identity when samples == 0)
};

/// target = G1 G2^T / n with G1, G2 n x k Gaussian; inputs X are n x N
/// standard Gaussian. samples == 0 means population covariance (identity).
SyntheticTask make_synthetic_task(std::size_t n, std::size_t rank, std::size_t samples,
                                  RngStream& rng);

/// Loss value and dLoss/dJ.
double loss_value(const Matrix& j, const SyntheticTask& task, LossKind kind);
Matrix loss_gradient(const Matrix& j, const SyntheticTask& task, LossKind kind);

struct TrainConfig {
  double step_size = 1e-2;
  std::size_t steps = 1000;
  LossKind loss = LossKind::SquaredOnDataset;
  std::size_t log_every = 1;
  /// number of singular triplets tracked
  std::size_t svd_rank_logged = 10;
  /// depth fit and alignment epsilon are computed every this many steps
  /// (0 disables them)
  std::size_t diagnostics_every = 0;
  /// skip the eta * s_1(J)^2 < 1 check
  bool override_stability = false;
};

struct DepthFitRow {
  double gamma = 0.0;
  double delta = 0.0;
  double residual = 0.0;
  std::size_t points = 0;
  /// some prefix products were excluded (zero or unresolved singular value)
  bool flagged = false;
};

struct TrainRecord {
  std::size_t step = 0;
  double loss = 0.0;
  std::vector<double> s;  // s_1..s_k of J
  std::vector<double> g;  // <grad_J, u_k v_k^T>
  std::vector<double> u1, v1;
  double drift = 0.0;
  /// max over l = 2..L-1 of the top-block alignment deviation; NaN when not computed
  double epsilon = 0.0;
  std::vector<DepthFitRow> fit;  // empty when not computed
  std::vector<double> sdot_balanced;
  std::vector<double> sdot_fixed_gates;  // NaN when no fit is available
  std::vector<bool> degenerate;          // s_k too close to a neighbour
};

struct TrainTrace {
  std::size_t depth = 0;
  double step_size = 0.0;
  std::vector<TrainRecord> records;
  std::vector<std::string> warnings;
};

/// Carries the trace up to the last finite step.
class TrainingDiverged : public DivergenceError {
 public:
  TrainingDiverged(const std::string& what, TrainTrace partial, std::size_t last_good_step)
      : DivergenceError(what), partial_(std::move(partial)), last_good_(last_good_step) {}
  const TrainTrace& partial() const noexcept { return partial_; }
  std::size_t last_good_step() const noexcept { return last_good_; }

 private:
  TrainTrace partial_;
  std::size_t last_good_;
};

/// W_l <- W_l - eta grad_{W_l} for cfg.steps steps; m is updated in place.
/// Throws ConfigError when eta * s_1(J)^2 >= 1 unless overridden, and
/// TrainingDiverged on non-finite weights.
TrainTrace train(FglnModel& m, const SyntheticTask& task, const TrainConfig& cfg);

}  // namespace gspec
