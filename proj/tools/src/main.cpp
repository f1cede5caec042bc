#include <CLI11.hpp>
#include <iostream>

#include "ucmlab/app/commands.hpp"

int main(int argc, char** argv) {
  using namespace ucmlab::app;
  CLI::App app{"ucmlab: hyperbolicity checks and finite-volume runs for relaxing viscoelastic models"};
  app.require_subcommand(1, 1);

  CliOptions opt;
  std::uint64_t seed = 0;
  int threads = 0;
  const char* names[][2] = {
      {"check", "sample states and verify symmetric hyperbolicity"},
      {"run", "finite-volume run from a config (resumable from a snapshot)"},
      {"stokes", "Stokes first problem against the closed form, plus the Fig1 curves"},
      {"convergence", "refinement ladder and observed slope"},
      {"spectrum", "characteristic speeds along a path between two sampled states"},
  };
  for (const auto& [name, help] : names) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", opt.out_dir, "output directory (overrides [output] dir)");
    sub->add_option("--seed", seed, "random seed (overrides [system] seed)");
    sub->add_option("--threads", threads, "worker threads (overrides [solver] threads)")->check(CLI::PositiveNumber);
    sub->add_flag("--bit-exact", opt.bit_exact, "single-threaded, reproducible to the bit");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfigError;
  }
  for (CLI::App* sub : app.get_subcommands()) {
    opt.command = sub->get_name();
    if (sub->count("--seed")) opt.seed = seed;
    if (sub->count("--threads")) opt.threads = threads;
  }
  return run_command(opt, std::cout, std::cerr);
}
