#pragma once

#include "floqmem/config.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace floqmem {

inline constexpr int exit_success = 0;
inline constexpr int exit_config_error = 1;
inline constexpr int exit_partial_failure = 2;

struct CommandContext {
  RunConfig config;
  int jobs = 1;
  std::ostream* log = nullptr;  // progress messages, may be null

  std::filesystem::path out_dir() const { return config.output.directory; }
};

int cmd_quasienergies(const CommandContext& ctx);
int cmd_coefficients(const CommandContext& ctx);
int cmd_evolve(const CommandContext& ctx);
int cmd_sweep(const CommandContext& ctx);
int cmd_crossings(const CommandContext& ctx);
// Renders sweep.csv and quasienergies.csv found in `input` to SVG files.
int cmd_plot(const CommandContext& ctx, const std::filesystem::path& input);

// Full command-line entry point; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace floqmem
