#include "gated_spectra/fgln/training.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "gated_spectra/alignment/alignment.hpp"
#include "gated_spectra/fgln/dynamics.hpp"
#include "gated_spectra/linalg/decompositions.hpp"

namespace gspec {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kMonotoneWindow = 50;
constexpr std::size_t kMaxWarnings = 20;

double alignment_epsilon(const FglnModel& m, const SvdFactors& fj, std::size_t k) {
  double eps = 0.0;
  bool any = false;
  for (std::size_t l = 2; l + 1 <= m.depth(); ++l) {
    const auto parts = m.partial_products(l);
    const auto fa = svd(parts.A);
    const auto fb = svd(parts.B);
    eps = std::max(eps, rotation(fj.U, fa.U, k).sup_deviation);
    eps = std::max(eps, rotation(fj.V, fb.V, k).sup_deviation);
    any = true;
  }
  return any ? eps : kNaN;
}

bool all_finite(const std::vector<Matrix>& ws) {
  return std::all_of(ws.begin(), ws.end(), [](const Matrix& w) { return w.all_finite(); });
}

}  // namespace

SyntheticTask make_synthetic_task(std::size_t n, std::size_t rank, std::size_t samples,
                                  RngStream& rng) {
  if (rank < 1 || rank > n) throw DomainError("make_synthetic_task: need 1 <= rank <= n");
  SyntheticTask task;
  task.n = n;
  task.rank = rank;
  task.samples = samples;
  const Matrix g1 = sample_gaussian(n, rank, 1.0, rng);
  const Matrix g2 = sample_gaussian(n, rank, 1.0, rng);
  task.target = times_transpose(g1, g2);
  task.target *= 1.0 / static_cast<double>(n);
  if (samples == 0) {
    task.covariance = Matrix::identity(n);
  } else {
    const Matrix x = sample_gaussian(n, samples, 1.0, rng);
    task.covariance = times_transpose(x, x);
    task.covariance *= 1.0 / static_cast<double>(samples);
  }
  return task;
}

double loss_value(const Matrix& j, const SyntheticTask& task, LossKind kind) {
  const Matrix e = j - task.target;
  if (kind == LossKind::SquaredToTarget) return 0.5 * frobenius_inner(e, e);
  return 0.5 * frobenius_inner(e * task.covariance, e);
}

Matrix loss_gradient(const Matrix& j, const SyntheticTask& task, LossKind kind) {
  Matrix e = j - task.target;
  if (kind == LossKind::SquaredToTarget) return e;
  return e * task.covariance;
}

TrainTrace train(FglnModel& m, const SyntheticTask& task, const TrainConfig& cfg) {
  if (!(cfg.step_size > 0.0)) throw ConfigError("train: step size must be positive");
  if (cfg.log_every < 1) throw ConfigError("train: log_every must be >= 1");
  const Matrix j0 = m.end_to_end();
  if (j0.rows() != task.target.rows() || j0.cols() != task.target.cols())
    throw ShapeMismatch("train: task shape differs from the network");
  const std::size_t kmax = std::min(cfg.svd_rank_logged, std::min(j0.rows(), j0.cols()));
  if (kmax < 1) throw ConfigError("train: svd_rank_logged must be >= 1");

  const double s1 = svd(j0).s.front();
  if (!cfg.override_stability && cfg.step_size * s1 * s1 >= 1.0) {
    std::ostringstream msg;
    msg << "train: step size " << cfg.step_size << " fails the stability heuristic eta * s1(J)^2 < 1"
        << " (s1 = " << s1 << ")";
    throw ConfigError(msg.str());
  }

  TrainTrace trace;
  trace.depth = m.depth();
  trace.step_size = cfg.step_size;
  std::vector<double> losses;
  Matrix prev_u, prev_v;
  std::vector<DepthFitRow> last_fit;

  for (std::size_t t = 0;; ++t) {
    const Matrix j = m.end_to_end();
    const Matrix grad = loss_gradient(j, task, cfg.loss);
    const double loss = loss_value(j, task, cfg.loss);
    if (t > 0 && (!grad.all_finite() || !std::isfinite(loss))) {
      // weights can stay finite while their product overflows
      std::ostringstream msg;
      msg << "train: non-finite end-to-end map at step " << t << " (last finite step " << t - 1 << ")";
      throw TrainingDiverged(msg.str(), std::move(trace), t - 1);
    }
    losses.push_back(loss);
    if (t >= kMonotoneWindow && loss > losses[t - kMonotoneWindow] &&
        trace.warnings.size() < kMaxWarnings) {
      std::ostringstream msg;
      msg << "loss increased over the " << kMonotoneWindow << "-step window ending at step " << t
          << " (" << losses[t - kMonotoneWindow] << " -> " << loss << "); possible divergence";
      trace.warnings.push_back(msg.str());
    }

    if (t % cfg.log_every == 0 || t == cfg.steps) {
      auto f = svd(j);
      if (!prev_u.empty()) {
        // keep singular vectors continuous in time
        for (std::size_t c = 0; c < kmax; ++c) {
          double d = 0.0;
          for (std::size_t i = 0; i < f.U.rows(); ++i) d += prev_u(i, c) * f.U(i, c);
          if (d < 0.0) {
            for (std::size_t i = 0; i < f.U.rows(); ++i) f.U(i, c) = -f.U(i, c);
            for (std::size_t i = 0; i < f.V.rows(); ++i) f.V(i, c) = -f.V(i, c);
          }
        }
      }
      prev_u = f.U;
      prev_v = f.V;

      TrainRecord rec;
      rec.step = t;
      rec.loss = loss;
      rec.drift = balancing_drift(m);
      rec.u1 = f.U.column(0);
      rec.v1 = f.V.column(0);
      const bool diagnostics = cfg.diagnostics_every > 0 && t % cfg.diagnostics_every == 0;
      if (diagnostics) {
        rec.fit = depth_scaling_fit(m, kmax);
        last_fit = rec.fit;
        rec.epsilon = alignment_epsilon(m, f, kmax);
      } else {
        rec.epsilon = kNaN;
      }
      for (std::size_t k = 1; k <= kmax; ++k) {
        const auto u = f.U.column(k - 1);
        const auto v = f.V.column(k - 1);
        const double g = dot(u, matvec(grad, v));
        rec.s.push_back(f.s[k - 1]);
        rec.g.push_back(g);
        rec.sdot_balanced.push_back(sdot_formula(f.s[k - 1], g, m.depth(), 0.0));
        rec.sdot_fixed_gates.push_back(last_fit.empty() || !std::isfinite(last_fit[k - 1].delta)
                                           ? kNaN
                                           : sdot_formula(f.s[k - 1], g, m.depth(),
                                                          last_fit[k - 1].delta));
        const double tol = kDegenerateGap * f.s.front();
        const bool deg = (k > 1 && f.s[k - 2] - f.s[k - 1] <= tol) ||
                         (k < f.s.size() && f.s[k - 1] - f.s[k] <= tol);
        rec.degenerate.push_back(deg);
      }
      trace.records.push_back(std::move(rec));
    }

    if (t == cfg.steps) break;

    const auto grads = m.grad_weights(grad);
    std::vector<Matrix> next = m.weights();
    for (std::size_t l = 0; l < next.size(); ++l) {
      Matrix step = grads[l];
      step *= cfg.step_size;
      next[l] -= step;
    }
    if (!all_finite(next)) {
      std::ostringstream msg;
      msg << "train: non-finite weights after step " << t + 1 << " (last finite step " << t << ")";
      throw TrainingDiverged(msg.str(), std::move(trace), t);
    }
    m.set_weights(std::move(next));
  }
  return trace;
}

}  // namespace gspec
