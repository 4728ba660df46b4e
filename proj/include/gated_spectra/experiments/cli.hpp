#pragma once

namespace gspec {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumerical = 3,
  kExitDivergence = 4,
};

/// Entry point of the gated-spectra executable.
int run_cli(int argc, char** argv);

}  // namespace gspec
