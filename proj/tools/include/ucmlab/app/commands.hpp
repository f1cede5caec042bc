#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace ucmlab::app {

enum ExitCode : int {
  kExitPass = 0,
  kExitVerificationFailure = 1,
  kExitInvariantViolation = 2,
  kExitConfigError = 3,
};

struct CliOptions {
  std::string command;  // check | run | stokes | convergence | spectrum
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool bit_exact = false;
};

// Runs one subcommand. Progress and summaries go to `out`, errors to `err`.
int run_command(const CliOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace ucmlab::app
