#include "gated_spectra/experiments/cli.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gated_spectra/experiments/commands.hpp"
#include "gated_spectra/experiments/config.hpp"
#include "gated_spectra/simd/kernels.hpp"
#include "gated_spectra/util/errors.hpp"
#include "gated_spectra/util/parallel.hpp"

#ifndef GATED_SPECTRA_VERSION
#define GATED_SPECTRA_VERSION "0.0.0"
#endif
#ifndef GATED_SPECTRA_GIT_DESCRIBE
#define GATED_SPECTRA_GIT_DESCRIBE "unknown"
#endif

namespace gspec {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Flags {
  std::string config_file, n, depth, p, r, sigma, k_max, trials, seed, out = ".";
  std::string mode, steps, eta, d_trials, log_every;
  bool paper = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, ',')) {
    if (cur.empty()) throw ConfigError("empty element in list '" + s + "'");
    out.push_back(cur);
  }
  if (out.empty()) throw ConfigError("empty list");
  return out;
}

std::uint64_t parse_u64(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    if (!s.empty() && s[0] == '-') throw std::invalid_argument(s);
    const unsigned long long v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("--") + what + ": expected a non-negative integer, got '" + s + "'");
  }
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("--") + what + ": expected a number, got '" + s + "'");
  }
}

json read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path + ": " + e.what());
  }
}

ExperimentConfig resolve(const std::string& sub, const Flags& fl) {
  json file = json::object();
  if (!fl.config_file.empty()) file = read_config_file(fl.config_file);
  if (!file.is_object()) throw ConfigError("config file must hold a JSON object");

  std::string mode = fl.mode;
  if (mode.empty() && file.contains("mode") && file["mode"].is_string())
    mode = file["mode"].get<std::string>();
  bool paper = fl.paper;
  if (!paper && file.contains("paper") && file["paper"].is_boolean()) paper = file["paper"].get<bool>();
  if (fl.paper) file.erase("paper");

  ExperimentConfig cfg = overlay_json(default_config(sub, mode, paper), file);

  if (!fl.n.empty()) cfg.n = parse_u64(fl.n, "n");
  if (!fl.depth.empty()) {
    cfg.depths.clear();
    for (const auto& v : split_list(fl.depth)) cfg.depths.push_back(parse_u64(v, "depth"));
  }
  if (!fl.p.empty()) {
    cfg.p.clear();
    for (const auto& v : split_list(fl.p)) cfg.p.push_back(parse_double(v, "p"));
  }
  if (!fl.r.empty()) cfg.r = parse_u64(fl.r, "r");
  if (!fl.sigma.empty()) {
    if (fl.sigma == "auto") cfg.sigma.reset();
    else cfg.sigma = parse_double(fl.sigma, "sigma");
  }
  if (!fl.k_max.empty()) cfg.k_max = parse_u64(fl.k_max, "k-max");
  if (!fl.trials.empty()) cfg.trials = parse_u64(fl.trials, "trials");
  if (!fl.d_trials.empty()) cfg.d_trials = parse_u64(fl.d_trials, "d-trials");
  if (!fl.seed.empty()) cfg.seed = parse_u64(fl.seed, "seed");
  if (!fl.steps.empty()) cfg.train.steps = parse_u64(fl.steps, "steps");
  if (!fl.eta.empty()) cfg.train.step_size = parse_double(fl.eta, "eta");
  if (!fl.log_every.empty()) cfg.train.log_every = parse_u64(fl.log_every, "log-every");
  cfg.out = fl.out;
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& path, const std::string& s) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot open " + path.string() + " for writing");
  f << s;
  if (!f) throw ConfigError("failed writing " + path.string());
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_outputs(const ExperimentConfig& cfg, const CommandOutput& out, const std::string& status,
                   double seconds) {
  const fs::path dir(cfg.out);
  json files = json::array();
  for (std::size_t i = 0; i < out.tables.size(); ++i) {
    const std::string name = (i == 0 ? cfg.subcommand : out.tables[i].name()) + ".csv";
    out.tables[i].write_csv(dir / name);
    files.push_back(name);
  }
  write_text(dir / "config.json", to_json(cfg).dump(2) + "\n");

  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  json meta = {
      {"version", GATED_SPECTRA_VERSION},
      {"schema_version", kSchemaVersion},
      {"git_describe", GATED_SPECTRA_GIT_DESCRIBE},
      {"subcommand", cfg.subcommand},
      {"mode", cfg.mode},
      {"status", status},
      {"config_hash", hash},
      {"seed", cfg.seed},
      {"simd_backend", std::string(simd::backend_name(simd::active_backend()))},
      {"threads", worker_count()},
      {"wall_time_seconds", seconds},
      {"finished_at", utc_now()},
      {"files", files},
      {"warnings", out.warnings},
      {"trial_policy",
       cfg.paper ? "full trial counts (--paper)" : "reduced trial counts for quick runs; --paper selects full counts"},
      {"seed_policy",
       "all draws come from Philox streams keyed by the seed; Monte Carlo trial t uses substream t"},
      {"details", out.details}};
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

constexpr const char* kDescription =
    "Lyapunov spectra, alignment and training dynamics of fixed-gates linear networks.\n"
    "Trained modes use a synthetic rank-10 linear regression task (Gaussian inputs) in\n"
    "place of an image dataset.\n\n"
    "Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 training divergence.\n"
    "GATED_SPECTRA_THREADS caps the number of worker threads.";

}  // namespace

int run_cli(int argc, char** argv) {
  CLI::App app{kDescription, "gated-spectra"};
  app.require_subcommand(1);
  app.set_version_flag("--version", GATED_SPECTRA_VERSION);

  Flags fl;
  std::string chosen;
  const std::pair<const char*, const char*> subs[] = {
      {"lyapunov-convergence", "(1/L) log s_i against theory over a grid of depths"},
      {"spectrum", "top k_max Lyapunov exponents at one depth"},
      {"depth-scaling", "log singular values of prefix products and their affine fit (--mode init|trained)"},
      {"alignment", "diagonal correlation of singular bases (--mode init|trained|synthetic-sweep)"},
      {"train", "gradient descent on a fixed-gates network with spectrum trace (--mode synthetic|balanced)"},
      {"d-coefficients", "Monte Carlo finite-depth coefficients d_i"}};
  for (const auto& [name, help] : subs) {
    CLI::App* s = app.add_subcommand(name, help);
    s->add_option("--config", fl.config_file, "JSON config file (same keys as config.json)");
    s->add_option("--mode", fl.mode, "subcommand mode");
    s->add_option("--n", fl.n, "width");
    s->add_option("--depth", fl.depth, "depth or comma-separated list");
    s->add_option("--p", fl.p, "gate probability (comma-separated list allowed)");
    s->add_option("--r", fl.r, "minimum gate rank");
    s->add_option("--sigma", fl.sigma, "weight std, or 'auto' for 1/sqrt(n)");
    s->add_option("--k-max", fl.k_max, "number of singular values / exponents");
    s->add_option("--trials", fl.trials, "Monte Carlo trials");
    s->add_option("--d-trials", fl.d_trials, "samples for the d_i estimates");
    s->add_option("--seed", fl.seed, "master seed");
    s->add_option("--steps", fl.steps, "training steps");
    s->add_option("--eta", fl.eta, "training step size");
    s->add_option("--log-every", fl.log_every, "log every this many steps");
    s->add_option("--out", fl.out, "output directory (created if missing)");
    s->add_flag("--paper", fl.paper, "full trial counts");
    s->callback([&chosen, name = std::string(name)] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  ExperimentConfig cfg;
  try {
    cfg = resolve(chosen, fl);
    fs::create_directories(cfg.out);
  } catch (const Error& e) {
    std::cerr << "gated-spectra: " << e.what() << "\n";
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "gated-spectra: " << e.what() << "\n";
    return kExitConfig;
  }

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  try {
    const CommandOutput out = run_command(cfg);
    write_outputs(cfg, out, "ok", elapsed());
    for (const auto& w : out.warnings) std::cerr << "warning: " << w << "\n";
    return kExitOk;
  } catch (const CommandDiverged& e) {
    std::cerr << "gated-spectra: " << e.what() << "\n";
    try {
      write_outputs(cfg, e.partial(), "diverged", elapsed());
    } catch (const std::exception& w) {
      std::cerr << "gated-spectra: could not write partial output: " << w.what() << "\n";
    }
    return kExitDivergence;
  } catch (const DivergenceError& e) {
    std::cerr << "gated-spectra: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ConfigError& e) {
    std::cerr << "gated-spectra: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "gated-spectra: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "gated-spectra: numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace gspec
