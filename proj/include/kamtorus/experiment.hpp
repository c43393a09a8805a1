#pragma once

// Config-driven experiments behind the command-line driver. Each command
// reads one JSON config, writes its artifacts to an output directory and
// returns an exit code.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "kamtorus/io.hpp"

namespace kamtorus::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,    // invalid config or I/O failure
  kExitExcluded = 2,  // resonance met (excluded parameter, refused division)
  kExitDiverged = 3,  // scheme diverged or a numerical self-check failed
};

struct RunOptions {
  std::optional<std::filesystem::path> out;  // overrides the environment and config
  int threads = 1;
  std::optional<std::uint64_t> seed;  // overrides the config
};

/// --out, else $KAMTORUS_OUT, else config "output", else "out".
std::filesystem::path output_dir(const io::Json& config, const RunOptions& options);

int cmd_straighten(const io::Json& config, const RunOptions& options, std::ostream& log);
int cmd_sweep(const io::Json& config, const RunOptions& options, std::ostream& log);
int cmd_transport(const io::Json& config, const RunOptions& options, std::ostream& log);
int cmd_forced(const io::Json& config, const RunOptions& options, std::ostream& log);
int cmd_verify(const io::Json& config, const RunOptions& options, std::ostream& log);

/// Dispatches by name and maps library errors to exit codes.
int run_command(const std::string& command, const io::Json& config, const RunOptions& options,
                std::ostream& log);

}  // namespace kamtorus::cli
