#include "gated_spectra/experiments/config.hpp"

#include <algorithm>
#include <cmath>

#include "gated_spectra/util/errors.hpp"

namespace gspec {

using nlohmann::json;

namespace {

bool known_subcommand(std::string_view s) {
  return std::find(std::begin(kSubcommands), std::end(kSubcommands), s) != std::end(kSubcommands);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + j.dump());
  }
}

std::size_t get_size(const json& j, const char* key) {
  if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0))
    throw ConfigError(std::string("config: '") + key + "' must be a non-negative integer");
  return j.get<std::size_t>();
}

double get_double(const json& j, const char* key) {
  if (!j.is_number()) throw ConfigError(std::string("config: '") + key + "' must be a number");
  return j.get<double>();
}

template <class T, class F>
std::vector<T> get_list(const json& j, const char* key, F one) {
  std::vector<T> out;
  if (j.is_array()) {
    for (const auto& v : j) out.push_back(one(v, key));
  } else {
    out.push_back(one(j, key));
  }
  return out;
}

}  // namespace

double ExperimentConfig::resolved_sigma() const {
  return sigma ? *sigma : 1.0 / std::sqrt(static_cast<double>(n));
}

std::vector<std::string> subcommand_modes(std::string_view subcommand) {
  if (subcommand == "depth-scaling") return {"init", "trained"};
  if (subcommand == "alignment") return {"init", "trained", "synthetic-sweep"};
  if (subcommand == "train") return {"synthetic", "balanced"};
  if (known_subcommand(subcommand)) return {"default"};
  throw ConfigError("unknown subcommand '" + std::string(subcommand) + "'");
}

ExperimentConfig default_config(std::string_view subcommand, std::string_view mode, bool paper) {
  const auto modes = subcommand_modes(subcommand);
  ExperimentConfig c;
  c.subcommand = std::string(subcommand);
  c.mode = mode.empty() ? modes.front() : std::string(mode);
  require(std::find(modes.begin(), modes.end(), c.mode) != modes.end(),
          "mode '" + c.mode + "' is not valid for " + c.subcommand);
  c.paper = paper;

  // the synthetic rank-10 regression task used by every trained mode
  auto rank_task = [&] {
    c.n = 64;
    c.depths = {10};
    c.p = {0.5};
    c.train.step_size = 1e-2;
    c.train.steps = paper ? 10000 : 1000;
    c.train.log_every = 1;
    c.train.task_rank = 10;
    c.train.samples = 1000;
    c.train.loss = "dataset";
    c.train.diagnostics_every = paper ? 100 : 50;
  };

  if (c.subcommand == "lyapunov-convergence") {
    c.depths = {5, 10, 20, 50, 100};
    c.p = {1.0, 0.5};
    c.k_max = 1;
    c.trials = paper ? 50 : 8;
    c.d_trials = paper ? 20000 : 2000;
  } else if (c.subcommand == "spectrum") {
    c.depths = {20};
    c.p = {1.0};
    c.k_max = 64;
    c.trials = paper ? 30 : 4;
    c.d_trials = paper ? 20000 : 2000;
  } else if (c.subcommand == "depth-scaling") {
    c.k_max = 30;
    c.trials = 1;
    if (c.mode == "init") {
      c.depths = {100};
      c.p = {0.5};
    } else {
      rank_task();
    }
  } else if (c.subcommand == "alignment") {
    if (c.mode == "init") {
      c.depths = {2, 10, 20};
      c.p = {1.0};
      c.trials = paper ? 20 : 3;
    } else if (c.mode == "trained") {
      rank_task();
      c.trials = 1;
    } else {
      c.n = 5;
      c.r = 3;
      c.depths = {1};
      c.p = {1.0};
      c.trials = paper ? 8 : 2;
      c.taus = {1, 2, 3, 4, 6, 8, 12, 16, 20};
    }
  } else if (c.subcommand == "train") {
    if (c.mode == "synthetic") {
      rank_task();
      c.k_max = 12;
    } else {
      c.n = 16;
      c.depths = {4};
      c.r = 8;
      c.p = {0.75};
      c.k_max = 8;
      c.train.step_size = 1e-4;
      c.train.steps = 500;
      c.train.log_every = 1;
      c.train.task_rank = 4;
      c.train.samples = 0;
      c.train.loss = "target";
      c.train.diagnostics_every = 100;
      c.train.spectrum = {2.0, 1.7, 1.4, 1.2, 1.0, 0.8, 0.6, 0.4};
    }
  } else if (c.subcommand == "d-coefficients") {
    c.n = 32;
    c.depths = {1};
    c.p = {1.0};
    c.k_max = 31;
    c.trials = paper ? 10000 : 1000;
  }
  return c;
}

void ExperimentConfig::validate() const {
  require(known_subcommand(subcommand), "unknown subcommand '" + subcommand + "'");
  const auto modes = subcommand_modes(subcommand);
  require(std::find(modes.begin(), modes.end(), mode) != modes.end(),
          "mode '" + mode + "' is not valid for " + subcommand);
  require(n >= 1, "n must be >= 1");
  require(!depths.empty(), "depth list is empty");
  for (auto L : depths) require(L >= 1, "depths must be >= 1");
  require(!p.empty(), "p list is empty");
  for (double v : p) require(v > 0.0 && v <= 1.0, "p must lie in (0, 1]");
  require(r >= 1 && r <= n, "r must satisfy 1 <= r <= n");
  require(!sigma || (std::isfinite(*sigma) && *sigma > 0.0), "sigma must be positive");
  require(k_max >= 1 && k_max <= n, "k_max must satisfy 1 <= k_max <= n");
  require(trials >= 1, "trials must be >= 1");
  require(block >= 1, "block must be >= 1");

  const bool single_depth = subcommand == "spectrum" || subcommand == "depth-scaling" ||
                            subcommand == "train" ||
                            (subcommand == "alignment" && mode == "trained");
  if (single_depth) require(depths.size() == 1, subcommand + " takes a single depth");

  if (subcommand == "lyapunov-convergence" || subcommand == "spectrum") {
    require(trials >= 2, "trials must be >= 2 for a standard error");
    require(n >= 2 && k_max <= n - 1, "need k_max <= n - 1 for the d_i estimates");
    require(d_trials >= 2, "d_trials must be >= 2");
  }
  if (subcommand == "d-coefficients") {
    require(n >= 2 && k_max <= n - 1, "d-coefficients needs k_max <= n - 1");
    require(trials >= 2, "trials must be >= 2");
  }
  if (subcommand == "alignment" && mode == "init")
    for (auto L : depths) require(L >= 2, "alignment needs depth >= 2");
  if (subcommand == "alignment" && mode == "synthetic-sweep") {
    require(n >= 2 && r < n, "synthetic-sweep needs 1 <= r < n");
    require(!taus.empty(), "synthetic-sweep needs at least one tau");
  }
  if (subcommand == "train" || mode == "trained") {
    require(train.step_size > 0.0 && std::isfinite(train.step_size), "step_size must be positive");
    require(train.log_every >= 1, "log_every must be >= 1");
    require(train.loss == "dataset" || train.loss == "target", "loss must be 'dataset' or 'target'");
    require(train.task_rank >= 1 && train.task_rank <= n, "task_rank must lie in [1, n]");
    if (mode == "trained") require(depths.front() >= 2, "trained modes need depth >= 2");
  }
  if (subcommand == "train" && mode == "balanced") {
    require(!train.spectrum.empty(), "balanced mode needs a spectrum");
    for (double s : train.spectrum) require(s > 0.0, "spectrum entries must be positive");
    require(train.spectrum.size() <= r, "spectrum longer than the guaranteed gate rank r");
  }
}

json to_json(const ExperimentConfig& c) {
  json t = {{"step_size", c.train.step_size},
            {"steps", c.train.steps},
            {"log_every", c.train.log_every},
            {"task_rank", c.train.task_rank},
            {"samples", c.train.samples},
            {"loss", c.train.loss},
            {"diagnostics_every", c.train.diagnostics_every},
            {"spectrum", c.train.spectrum}};
  return json{{"subcommand", c.subcommand},
              {"mode", c.mode},
              {"n", c.n},
              {"depth", c.depths},
              {"p", c.p},
              {"r", c.r},
              {"sigma", c.resolved_sigma()},
              {"k_max", c.k_max},
              {"trials", c.trials},
              {"d_trials", c.d_trials},
              {"seed", c.seed},
              {"taus", c.taus},
              {"block", c.block},
              {"paper", c.paper},
              {"train", t}};
}

ExperimentConfig overlay_json(ExperimentConfig c, const json& j) {
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "subcommand") {
      require(get_as<std::string>(v, k) == c.subcommand,
              "config file is for '" + v.dump() + "', not " + c.subcommand);
    } else if (key == "mode") {
      require(get_as<std::string>(v, k) == c.mode, "config: mode mismatch");
    } else if (key == "n") {
      c.n = get_size(v, k);
    } else if (key == "depth") {
      c.depths = get_list<std::size_t>(v, k, get_size);
    } else if (key == "p") {
      c.p = get_list<double>(v, k, get_double);
    } else if (key == "r") {
      c.r = get_size(v, k);
    } else if (key == "sigma") {
      if (v.is_string()) {
        require(v.get<std::string>() == "auto", "config: sigma must be a number or \"auto\"");
        c.sigma.reset();
      } else {
        c.sigma = get_double(v, k);
      }
    } else if (key == "k_max") {
      c.k_max = get_size(v, k);
    } else if (key == "trials") {
      c.trials = get_size(v, k);
    } else if (key == "d_trials") {
      c.d_trials = get_size(v, k);
    } else if (key == "seed") {
      require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0),
              "config: seed must be an unsigned integer");
      c.seed = v.get<std::uint64_t>();
    } else if (key == "taus") {
      c.taus = get_list<double>(v, k, get_double);
    } else if (key == "block") {
      c.block = get_size(v, k);
    } else if (key == "paper") {
      require(get_as<bool>(v, k) == c.paper, "config: paper flag mismatch");
    } else if (key == "train") {
      if (!v.is_object()) throw ConfigError("config: 'train' must be an object");
      for (const auto& [tk, tv] : v.items()) {
        const char* kk = tk.c_str();
        if (tk == "step_size") c.train.step_size = get_double(tv, kk);
        else if (tk == "steps") c.train.steps = get_size(tv, kk);
        else if (tk == "log_every") c.train.log_every = get_size(tv, kk);
        else if (tk == "task_rank") c.train.task_rank = get_size(tv, kk);
        else if (tk == "samples") c.train.samples = get_size(tv, kk);
        else if (tk == "loss") c.train.loss = get_as<std::string>(tv, kk);
        else if (tk == "diagnostics_every") c.train.diagnostics_every = get_size(tv, kk);
        else if (tk == "spectrum") c.train.spectrum = get_list<double>(tv, kk, get_double);
        else throw ConfigError("config: unknown key 'train." + tk + "'");
      }
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  return c;
}

std::uint64_t config_hash(const ExperimentConfig& c) {
  const std::string s = to_json(c).dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace gspec
