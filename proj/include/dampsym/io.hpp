#pragma once

// Run configuration files and deterministic artifact output.
//
// Config schema (JSON):
//   {
//     "system":  {"label": "...", "K": [[...]], "C": [[...]]}   or "path/to/system.json",
//     "initial": {"q": [...], "p": [...], "t": 0.0},
//     "tau": 0.2, "n_steps": 250,
//     "method": "midpoint_direct",        optional, default midpoint_direct
//     "epsilon": 1e-8,                    optional, K~ guard
//     "horizon": 50.0,                    optional, must equal tau * n_steps
//     "output_prefix": "out/paper_1d"     optional
//   }

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include "json.hpp"

#include "dampsym/integrators.hpp"
#include "dampsym/system.hpp"

namespace dampsym {

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what, std::string path = {})
      : std::runtime_error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

/// An artifact could not be written.
class OutputError : public std::runtime_error {
public:
  OutputError(const std::string& what, std::string path)
      : std::runtime_error(what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

private:
  std::string path_;
};

struct RunConfig {
  DampedLinearSystem system;
  PhaseState initial;
  double tau = 0.0;
  std::size_t n_steps = 0;
  Method method = Method::midpoint_direct;
  double epsilon = kDefaultStiffnessGuard;
  std::optional<double> horizon;
  std::string output_prefix;
};

DampedLinearSystem system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const DampedLinearSystem& sys);

/// Relative system paths are resolved against `base_dir`. With `check` false
/// the result is not validated (callers apply overrides and validate later).
RunConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {},
                           bool check = true);
nlohmann::json config_to_json(const RunConfig& cfg);
RunConfig load_config(const std::filesystem::path& path, bool check = true);

/// Checks the invariants that CLI overrides could break (tau, n_steps,
/// epsilon, horizon, state dimension). Throws ConfigError.
void validate(const RunConfig& cfg);

/// 17 significant digits, '.' separator.
std::string format_double(double v);

/// Writes `content` to a sibling temporary file and renames it over `path`.
/// Missing parent directories are created. Throws OutputError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace dampsym
