#pragma once
// Resolved experiment configuration. Defaults depend on the subcommand, the
// mode and whether --paper was given; a config file and command-line flags
// are layered on top, in that order.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace gspec {

inline constexpr std::string_view kSubcommands[] = {
    "lyapunov-convergence", "spectrum", "depth-scaling", "alignment", "train", "d-coefficients"};

struct TrainSettings {
  double step_size = 1e-2;
  std::size_t steps = 1000;
  std::size_t log_every = 1;
  std::size_t task_rank = 10;
  /// 0 means population covariance
  std::size_t samples = 1000;
  std::string loss = "dataset";  // "dataset" or "target"
  std::size_t diagnostics_every = 50;
  /// end-to-end spectrum for balanced mode
  std::vector<double> spectrum;
};

struct ExperimentConfig {
  std::string subcommand;
  std::string mode;
  std::size_t n = 128;
  std::vector<std::size_t> depths;
  std::vector<double> p;
  std::size_t r = 1;
  /// nullopt means 1/sqrt(n)
  std::optional<double> sigma;
  std::size_t k_max = 1;
  std::size_t trials = 2;
  /// samples for the d_i estimates
  std::size_t d_trials = 2000;
  std::uint64_t seed = 2026;
  std::vector<double> taus;
  std::size_t block = 10;
  TrainSettings train;
  bool paper = false;
  std::string out = ".";

  double resolved_sigma() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Modes accepted by a subcommand; the first is the default. Throws
/// ConfigError for unknown subcommands.
std::vector<std::string> subcommand_modes(std::string_view subcommand);

ExperimentConfig default_config(std::string_view subcommand, std::string_view mode = "",
                                bool paper = false);

/// Resolved form (sigma written as a number). Output directory excluded.
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Overlays the keys present in j onto base. Unknown keys and wrong types
/// throw ConfigError.
ExperimentConfig overlay_json(ExperimentConfig base, const nlohmann::json& j);

/// FNV-1a of the compact dump of to_json(cfg).
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace gspec
