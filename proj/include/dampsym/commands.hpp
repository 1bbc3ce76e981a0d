#pragma once

// Command implementations behind the `dampsym` executable. Each command
// writes its artifacts under the config's output prefix and returns a summary;
// failures surface as ConfigError / OutputError / IntegrationError.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "dampsym/io.hpp"

namespace dampsym {

struct CommandResult {
  std::vector<std::filesystem::path> files;
  nlohmann::json summary;
};

/// `<prefix>.trajectory.csv` and `<prefix>.summary.json`.
CommandResult cmd_run(const RunConfig& cfg);

/// All three methods on one config: `<prefix>.compare.csv` (joined on step)
/// and `<prefix>.compare.json`.
CommandResult cmd_compare(const RunConfig& cfg);

/// Step-halving ladder from cfg.tau: `<prefix>.convergence.csv` and
/// `<prefix>.convergence.json`.
CommandResult cmd_convergence(const RunConfig& cfg, std::size_t levels, double t_final);

/// Per-step defects of both transition families and their factor-pair tests:
/// `<prefix>.symplectic.csv` and `<prefix>.symplectic.json`. Verdict lines go
/// to `report`.
CommandResult cmd_check_symplectic(const RunConfig& cfg, std::ostream& report);

/// Verdict thresholds for check-symplectic.
inline constexpr double kUnsymplecticThreshold = 1e-6;

/// Full command-line entry point. Returns the process exit status; errors are
/// printed to `err` as a JSON object {"error": {"kind", "message", "path"}}.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dampsym
