#pragma once

// Command-line front end. Every command is driven by a RunConfig: the
// command name, a JSON object of parameters, the output format and an
// optional output path. Flags and config files both resolve to a RunConfig;
// emitted records embed it in full, so feeding a record back through
// --config reproduces the run.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace stategeo::cli {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::uint64_t kDefaultSeed = 20240611;

enum ExitCode : int { kOk = 0, kInvalidInput = 2, kNumericalFailure = 3 };

struct RunConfig {
  std::string command;
  nlohmann::json params = nlohmann::json::object();
  std::string format = "json";
  std::optional<std::string> output_path;
  std::uint64_t seed = kDefaultSeed;

  [[nodiscard]] nlohmann::json to_json() const;
  /// Accepts either a bare config object or a full run record carrying one under "config".
  [[nodiscard]] static RunConfig from_json(const nlohmann::json& j);
};

[[nodiscard]] const std::vector<std::string>& commands();

/// Parameter defaults of a command. Throws DomainError for an unknown command.
[[nodiscard]] nlohmann::json default_params(const std::string& command);

/// Merges `params` over the defaults. Throws DomainError on unknown keys or
/// values of the wrong JSON type.
[[nodiscard]] RunConfig resolve(const RunConfig& config);

/// Parses command-line arguments (without the program name). Throws DomainError on bad input.
[[nodiscard]] RunConfig parse_args(const std::vector<std::string>& args);

/// Runs a resolved or unresolved config and returns its JSON record. Throws
/// the library's Error types.
[[nodiscard]] nlohmann::json execute(const RunConfig& config);

/// CSV text for a record produced by execute(): fixed header per command, then rows.
[[nodiscard]] std::string to_csv(const nlohmann::json& record);

/// Executes and writes output: JSON to `out` (or to the output path), CSV to
/// the output path (or `out` without one). Errors become a one-line JSON
/// object on `err` and a nonzero exit code.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_args followed by run, mapping parse errors to exit code 2.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Writes `text` to `path` through a temporary file and a rename.
void write_atomically(const std::string& path, const std::string& text);

}  // namespace stategeo::cli
