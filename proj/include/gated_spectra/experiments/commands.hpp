#pragma once
// One function per subcommand. Each returns its tables (the first one is
// written as <subcommand>.csv) plus extra metadata for meta.json.

#include <string>
#include <vector>

#include <json.hpp>

#include "gated_spectra/experiments/config.hpp"
#include "gated_spectra/experiments/table.hpp"
#include "gated_spectra/util/errors.hpp"

namespace gspec {

/// Bumped whenever a column is added, removed or reordered.
inline constexpr int kSchemaVersion = 1;

struct CommandOutput {
  std::vector<ResultTable> tables;
  nlohmann::json details = nlohmann::json::object();
  std::vector<std::string> warnings;
};

/// Training diverged; carries the tables built from the partial trace.
class CommandDiverged : public DivergenceError {
 public:
  CommandDiverged(const std::string& what, CommandOutput partial)
      : DivergenceError(what), partial_(std::move(partial)) {}
  const CommandOutput& partial() const noexcept { return partial_; }

 private:
  CommandOutput partial_;
};

CommandOutput cmd_lyapunov_convergence(const ExperimentConfig& cfg);
CommandOutput cmd_spectrum(const ExperimentConfig& cfg);
CommandOutput cmd_depth_scaling(const ExperimentConfig& cfg);
CommandOutput cmd_alignment(const ExperimentConfig& cfg);
CommandOutput cmd_train(const ExperimentConfig& cfg);
CommandOutput cmd_d_coefficients(const ExperimentConfig& cfg);

/// Validates cfg and dispatches on cfg.subcommand.
CommandOutput run_command(const ExperimentConfig& cfg);

}  // namespace gspec
