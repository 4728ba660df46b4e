#include "gated_spectra/experiments/commands.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gated_spectra/alignment/alignment.hpp"
#include "gated_spectra/fgln/dynamics.hpp"
#include "gated_spectra/fgln/model.hpp"
#include "gated_spectra/fgln/training.hpp"
#include "gated_spectra/lyapunov/empirical.hpp"
#include "gated_spectra/lyapunov/theory.hpp"
#include "gated_spectra/random/ensembles.hpp"
#include "gated_spectra/random/rng.hpp"
#include "gated_spectra/util/parallel.hpp"

namespace gspec {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double as_d(std::size_t v) { return static_cast<double>(v); }

RngStream root_stream(const ExperimentConfig& cfg) { return RngStream(cfg.seed, 0); }

LayerEnsemble ensemble(const ExperimentConfig& cfg, double p, std::size_t r) {
  LayerEnsemble e{cfg.n, r, p, cfg.resolved_sigma()};
  e.validate();
  return e;
}

// Exponent k of an unconditioned product is evaluated with the gate conditioned
// on rank >= k.
double gamma_for_index(const ExperimentConfig& cfg, double p, std::size_t k) {
  return gamma_theory(ensemble(cfg, p, std::max(cfg.r, k)), k);
}

// ---------------------------------------------------------------- training

struct TrainedRun {
  FglnModel initial;
  FglnModel trained;
  TrainTrace trace;
};

TrainConfig train_config(const ExperimentConfig& cfg) {
  TrainConfig tc;
  tc.step_size = cfg.train.step_size;
  tc.steps = cfg.train.steps;
  tc.loss = cfg.train.loss == "target" ? LossKind::SquaredToTarget : LossKind::SquaredOnDataset;
  tc.log_every = cfg.train.log_every;
  tc.svd_rank_logged = cfg.k_max;
  tc.diagnostics_every = cfg.train.diagnostics_every;
  return tc;
}

FglnModel initial_model(const ExperimentConfig& cfg, const RngStream& stream) {
  RngStream rng = stream.substream(1);
  const std::size_t L = cfg.depths.front();
  if (cfg.subcommand == "train" && cfg.mode == "balanced") {
    std::vector<Gate> gates;
    for (std::size_t l = 1; l < L; ++l) gates.push_back(sample_rp_gate(cfg.n, cfg.r, cfg.p.front(), rng));
    return balanced_init(gates, cfg.train.spectrum, rng, cfg.n, cfg.resolved_sigma());
  }
  return random_fgln(cfg.n, L, cfg.p.front(), cfg.resolved_sigma(), rng, cfg.r);
}

SyntheticTask task_for(const ExperimentConfig& cfg, const RngStream& stream) {
  RngStream rng = stream.substream(2);
  return make_synthetic_task(cfg.n, cfg.train.task_rank, cfg.train.samples, rng);
}

TrainedRun run_training(const ExperimentConfig& cfg, const RngStream& stream) {
  FglnModel model = initial_model(cfg, stream);
  const SyntheticTask task = task_for(cfg, stream);
  FglnModel initial = model;
  TrainTrace trace = train(model, task, train_config(cfg));
  return {std::move(initial), std::move(model), std::move(trace)};
}

// ------------------------------------------------------------ lyapunov

ResultTable exponent_table(const std::string& name, const std::string& depth_or_k) {
  std::vector<Column> cols = {{"p"}, {depth_or_k}};
  if (depth_or_k == "L") cols.push_back({"i"});
  for (const char* c : {"empirical_mean", "empirical_stderr"}) cols.push_back({c, true});
  cols.push_back({"gamma_theory"});
  cols.push_back({"corrected_theory"});
  cols.push_back({"d_stderr"});
  cols.push_back({"trials_used"});
  cols.push_back({"untrusted"});
  return ResultTable(name, cols);
}

}  // namespace

CommandOutput cmd_lyapunov_convergence(const ExperimentConfig& cfg) {
  const RngStream root = root_stream(cfg);
  const DCoefficients d = d_coefficients_mc(cfg.n, cfg.k_max, cfg.d_trials, root.substream(1));
  CommandOutput out;
  ResultTable t = exponent_table("lyapunov-convergence", "L");
  for (std::size_t pi = 0; pi < cfg.p.size(); ++pi) {
    const double p = cfg.p[pi];
    const LayerEnsemble e = ensemble(cfg, p, cfg.r);
    for (std::size_t L : cfg.depths) {
      const auto est =
          empirical_exponents(e, L, cfg.k_max, cfg.trials, root.substream(2).substream(pi).substream(L));
      for (std::size_t i = 1; i <= cfg.k_max; ++i) {
        const double g = gamma_for_index(cfg, p, i);
        const double corr = g + (d.d[i].estimate - d.d[i - 1].estimate) / as_d(L);
        t.add_row({p, as_d(L), as_d(i), est[i - 1].mean, est[i - 1].stderr_, g, corr,
                   d.diff_stderr[i] / as_d(L), as_d(est[i - 1].trials),
                   est[i - 1].flagged ? 1.0 : 0.0});
      }
    }
  }
  out.tables.push_back(std::move(t));
  return out;
}

CommandOutput cmd_spectrum(const ExperimentConfig& cfg) {
  const RngStream root = root_stream(cfg);
  const std::size_t L = cfg.depths.front();
  const DCoefficients d = d_coefficients_mc(cfg.n, cfg.k_max, cfg.d_trials, root.substream(1));
  CommandOutput out;
  ResultTable t = exponent_table("spectrum", "k");
  for (std::size_t pi = 0; pi < cfg.p.size(); ++pi) {
    const double p = cfg.p[pi];
    const auto est = empirical_exponents(ensemble(cfg, p, cfg.r), L, cfg.k_max, cfg.trials,
                                         root.substream(2).substream(pi));
    for (std::size_t k = 1; k <= cfg.k_max; ++k) {
      const double g = gamma_for_index(cfg, p, k);
      const double corr = g + (d.d[k].estimate - d.d[k - 1].estimate) / as_d(L);
      t.add_row({p, as_d(k), est[k - 1].mean, est[k - 1].stderr_, g, corr,
                 d.diff_stderr[k] / as_d(L), as_d(est[k - 1].trials),
                 est[k - 1].flagged ? 1.0 : 0.0});
    }
  }
  out.tables.push_back(std::move(t));
  return out;
}

// --------------------------------------------------------- depth scaling

namespace {

void append_depth_profile(ResultTable& profile, ResultTable& fit, const FglnModel& m,
                          std::size_t k_max, double stage) {
  const std::size_t k = std::min(k_max, m.weight(1).rows());
  RescaledProduct prod(m.weight(1).cols());
  for (std::size_t l = 1; l <= m.depth(); ++l) {
    prod.push_left(m.gated_factor(l));
    const SpectrumSample s = prod.spectrum(k, l);
    for (std::size_t i = 0; i < k; ++i)
      profile.add_row({stage, as_d(l), as_d(i + 1), s.log_s[i], s.trusted[i] ? 1.0 : 0.0});
  }
  const auto rows = depth_scaling_fit(m, k);
  for (std::size_t i = 0; i < rows.size(); ++i)
    fit.add_row({stage, as_d(i + 1), rows[i].gamma, rows[i].delta, rows[i].residual,
                 as_d(rows[i].points), rows[i].flagged ? 1.0 : 0.0});
}

}  // namespace

CommandOutput cmd_depth_scaling(const ExperimentConfig& cfg) {
  const RngStream root = root_stream(cfg);
  CommandOutput out;
  ResultTable profile("depth-scaling", {{"stage"}, {"l"}, {"k"}, {"log_s", true}, {"trusted"}});
  ResultTable fit("depth-scaling_fit", {{"stage"},
                                        {"k"},
                                        {"gamma", true},
                                        {"delta", true},
                                        {"residual", true},
                                        {"points"},
                                        {"flagged"}});
  if (cfg.mode == "init") {
    append_depth_profile(profile, fit, initial_model(cfg, root), cfg.k_max, 0.0);
  } else {
    try {
      TrainedRun run = run_training(cfg, root);
      append_depth_profile(profile, fit, run.initial, cfg.k_max, 0.0);
      append_depth_profile(profile, fit, run.trained, cfg.k_max, 1.0);
      out.warnings = run.trace.warnings;
      out.details["final_loss"] = run.trace.records.back().loss;
    } catch (const TrainingDiverged& e) {
      throw DivergenceError(std::string(e.what()) + " (depth-scaling has no partial output)");
    }
  }
  out.tables.push_back(std::move(profile));
  out.tables.push_back(std::move(fit));
  return out;
}

// ------------------------------------------------------------- alignment

namespace {

struct SplitStats {
  double uu = 0.0, uu2 = 0.0, uu_block = 0.0, uaau = 0.0, aa = 0.0, sup = 0.0;
  std::size_t count = 0;
  void add(const ProductAlignment& a) {
    uu += a.diag_corr_uu;
    uu2 += a.diag_corr_uu * a.diag_corr_uu;
    uu_block += a.diag_corr_uu_block;
    uaau += a.diag_corr_uaau;
    aa += a.diag_corr_aa;
    sup = std::max(sup, a.sup_deviation);
    ++count;
  }
};

ResultTable product_alignment_table() {
  return ResultTable("alignment", {{"stage"},
                                   {"L"},
                                   {"l"},
                                   {"diag_corr_UU"},
                                   {"diag_corr_UU_stderr", true},
                                   {"diag_corr_UU_block"},
                                   {"diag_corr_UAAU"},
                                   {"diag_corr_AA"},
                                   {"sup_deviation"},
                                   {"trials"}});
}

void append_split_rows(ResultTable& t, double stage, std::size_t L,
                       const std::vector<SplitStats>& stats) {
  for (std::size_t s = 1; s < L; ++s) {
    const SplitStats& a = stats[s];
    const double c = as_d(a.count);
    const double mean = a.uu / c;
    const double var = a.count > 1 ? std::max(0.0, (a.uu2 - c * mean * mean) / (c - 1.0)) : kNaN;
    t.add_row({stage, as_d(L), as_d(s), mean, std::sqrt(var / c), a.uu_block / c, a.uaau / c,
               a.aa / c, a.sup, c});
  }
}

std::vector<ProductAlignment> all_splits(std::span<const GatedLayer> layers, std::size_t block) {
  std::vector<ProductAlignment> out;
  for (std::size_t s = 1; s < layers.size(); ++s)
    out.push_back(product_alignment_report(layers, s, block));
  return out;
}

std::vector<GatedLayer> as_layers(const FglnModel& m) {
  std::vector<GatedLayer> out;
  for (std::size_t l = 1; l <= m.depth(); ++l)
    out.push_back({Gate::identity(m.weight(l).rows()), m.gated_factor(l)});
  return out;
}

}  // namespace

CommandOutput cmd_alignment(const ExperimentConfig& cfg) {
  const RngStream root = root_stream(cfg);
  const std::size_t block = std::min(cfg.block, cfg.n);
  CommandOutput out;

  if (cfg.mode == "synthetic-sweep") {
    ResultTable t("alignment", {{"trial"},
                                {"tau"},
                                {"i"},
                                {"j"},
                                {"observed"},
                                {"predicted"},
                                {"ratio", true},
                                {"sup_deviation"},
                                {"diag_corr"}});
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      RngStream rng = root.substream(1).substream(trial);
      const Matrix b = sample_ginibre(cfg.n, 1.0, rng);
      for (const auto& rep : synthetic_alignment_sweep(b, cfg.r, cfg.taus))
        for (const auto& e : rep.off_diagonal)
          t.add_row({as_d(trial), rep.parameter, as_d(e.i), as_d(e.j), e.observed, e.predicted,
                     e.predicted != 0.0 ? e.observed / e.predicted : kNaN, rep.sup_deviation,
                     rep.diag_corr});
    }
    out.tables.push_back(std::move(t));
    return out;
  }

  ResultTable t = product_alignment_table();
  if (cfg.mode == "init") {
    const LayerEnsemble e = ensemble(cfg, cfg.p.front(), cfg.r);
    for (std::size_t L : cfg.depths) {
      std::vector<std::vector<ProductAlignment>> per_trial(cfg.trials);
      parallel_for(cfg.trials, [&](std::size_t trial) {
        RngStream rng = root.substream(1).substream(L).substream(trial);
        std::vector<GatedLayer> layers;
        for (std::size_t l = 0; l < L; ++l) layers.push_back(sample_layer(e, rng));
        per_trial[trial] = all_splits(layers, block);
      });
      std::vector<SplitStats> stats(L);
      for (const auto& tr : per_trial)
        for (std::size_t s = 1; s < L; ++s) stats[s].add(tr[s - 1]);
      append_split_rows(t, 0.0, L, stats);
    }
  } else {
    const std::size_t L = cfg.depths.front();
    std::vector<SplitStats> before(L), after(L);
    for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
      TrainedRun run = [&] {
        try {
          return run_training(cfg, root.substream(3).substream(trial));
        } catch (const TrainingDiverged& e) {
          throw DivergenceError(std::string(e.what()) + " (alignment has no partial output)");
        }
      }();
      const auto a0 = all_splits(as_layers(run.initial), block);
      const auto a1 = all_splits(as_layers(run.trained), block);
      for (std::size_t s = 1; s < L; ++s) {
        before[s].add(a0[s - 1]);
        after[s].add(a1[s - 1]);
      }
      out.warnings.insert(out.warnings.end(), run.trace.warnings.begin(), run.trace.warnings.end());
    }
    append_split_rows(t, 0.0, L, before);
    append_split_rows(t, 1.0, L, after);
  }
  out.tables.push_back(std::move(t));
  return out;
}

// ----------------------------------------------------------------- train

namespace {

bool finite_record(const TrainRecord& r) {
  auto ok = [](const std::vector<double>& v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
  };
  return std::isfinite(r.loss) && std::isfinite(r.drift) && ok(r.s) && ok(r.sdot_balanced);
}

CommandOutput train_tables(const ExperimentConfig& cfg, TrainTrace trace) {
  const std::size_t k = cfg.k_max;
  // a diverging run can log overflowed values just before the weights go non-finite
  while (!trace.records.empty() && !finite_record(trace.records.back())) trace.records.pop_back();
  std::vector<Column> cols = {{"t"}, {"loss"}};
  for (std::size_t i = 1; i <= k; ++i) cols.push_back({"s_" + std::to_string(i)});
  cols.push_back({"balancing_drift"});
  cols.push_back({"epsilon_alignment", true});
  for (std::size_t i = 1; i <= k; ++i) cols.push_back({"sdot_balanced_" + std::to_string(i)});
  for (std::size_t i = 1; i <= k; ++i) cols.push_back({"sdot_fixed_gates_" + std::to_string(i), true});
  for (std::size_t i = 1; i <= k; ++i) cols.push_back({"sdot_observed_" + std::to_string(i), true});
  ResultTable t("train", cols);

  const auto& rec = trace.records;
  for (std::size_t r = 0; r < rec.size(); ++r) {
    std::vector<double> row = {as_d(rec[r].step), rec[r].loss};
    row.insert(row.end(), rec[r].s.begin(), rec[r].s.end());
    row.push_back(rec[r].drift);
    row.push_back(rec[r].epsilon);
    row.insert(row.end(), rec[r].sdot_balanced.begin(), rec[r].sdot_balanced.end());
    row.insert(row.end(), rec[r].sdot_fixed_gates.begin(), rec[r].sdot_fixed_gates.end());
    // forward difference in gradient-flow time
    for (std::size_t i = 0; i < k; ++i) {
      if (r + 1 < rec.size()) {
        const double dt = trace.step_size * as_d(rec[r + 1].step - rec[r].step);
        row.push_back((rec[r + 1].s[i] - rec[r].s[i]) / dt);
      } else {
        row.push_back(kNaN);
      }
    }
    t.add_row(std::move(row));
  }

  ResultTable pred("train_prediction", {{"k"}, {"t"}, {"observed"}, {"predicted", true}});
  CommandOutput out;
  json fits = json::array();
  if (rec.size() >= 2) {
    for (std::size_t i = 1; i <= k; ++i) {
      const IterativePrediction ip = iterative_prediction(trace, i);
      for (std::size_t r = 0; r < rec.size(); ++r)
        pred.add_row({as_d(i), as_d(rec[r].step), ip.observed[r], ip.predicted[r]});
      fits.push_back({{"k", i},
                      {"C", ip.C},
                      {"C_increment", ip.C_increment},
                      {"rmse", ip.rmse},
                      {"range", ip.range},
                      {"degenerate", ip.degenerate}});
    }
  }
  ResultTable fit_table("train_fit", {{"k"}, {"C"}, {"C_increment"}, {"rmse", true}, {"range"}});
  for (const auto& f : fits)
    fit_table.add_row({f["k"].get<double>(), f["C"].get<double>(), f["C_increment"].get<double>(),
                       f["rmse"].get<double>(), f["range"].get<double>()});
  out.tables.push_back(std::move(t));
  out.tables.push_back(std::move(pred));
  out.tables.push_back(std::move(fit_table));
  out.details["iterative_prediction"] = fits;
  out.warnings = trace.warnings;
  return out;
}

}  // namespace

CommandOutput cmd_train(const ExperimentConfig& cfg) {
  const RngStream root = root_stream(cfg);
  FglnModel model = initial_model(cfg, root);
  const SyntheticTask task = task_for(cfg, root);
  try {
    const TrainTrace trace = train(model, task, train_config(cfg));
    CommandOutput out = train_tables(cfg, trace);
    out.details["final_loss"] = trace.records.back().loss;
    return out;
  } catch (const TrainingDiverged& e) {
    CommandOutput partial = train_tables(cfg, e.partial());
    partial.details["diverged_after_step"] = e.last_good_step();
    throw CommandDiverged(e.what(), std::move(partial));
  }
}

// -------------------------------------------------------- d coefficients

CommandOutput cmd_d_coefficients(const ExperimentConfig& cfg) {
  const RngStream root = root_stream(cfg);
  const DCoefficients d = d_coefficients_mc(cfg.n, cfg.k_max, cfg.trials, root.substream(1));
  ResultTable t("d-coefficients", {{"i"},
                                   {"estimate"},
                                   {"stderr"},
                                   {"diff_stderr"},
                                   {"closed_form", true},
                                   {"closed_form_z", true}});
  const double d1 = d1_closed_form(cfg.n);
  for (std::size_t i = 0; i <= cfg.k_max; ++i) {
    double cf = kNaN, z = kNaN;
    if (i == 0) {
      cf = 0.0;
    } else if (i == 1) {
      cf = d1;
      z = (d.d[1].estimate - d1) / d.d[1].stderr_;
    }
    t.add_row({as_d(i), d.d[i].estimate, d.d[i].stderr_, d.diff_stderr[i], cf, z});
  }
  CommandOutput out;
  out.tables.push_back(std::move(t));
  return out;
}

CommandOutput run_command(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.subcommand == "lyapunov-convergence") return cmd_lyapunov_convergence(cfg);
  if (cfg.subcommand == "spectrum") return cmd_spectrum(cfg);
  if (cfg.subcommand == "depth-scaling") return cmd_depth_scaling(cfg);
  if (cfg.subcommand == "alignment") return cmd_alignment(cfg);
  if (cfg.subcommand == "train") return cmd_train(cfg);
  return cmd_d_coefficients(cfg);
}

}  // namespace gspec
