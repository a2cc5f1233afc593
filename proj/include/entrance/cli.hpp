#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "entrance/io.hpp"

namespace entrance::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumerical = 3;

inline const std::vector<std::string> kCommands = {"validate", "simulate", "flow",
                                                   "passage",  "classify", "diagnose"};

struct RunOptions {
    std::string command;
    std::filesystem::path config_path;
    /// (dotted path, raw value). Paths without a dot are relative to the
    /// command block: ("x0", "1e5") under passage sets passage.x0.
    std::vector<std::pair<std::string, std::string>> overrides;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::optional<std::filesystem::path> out_dir;
};

/// Reads the config file, resolves spec_file references and applies
/// overrides (flags > file > defaults). Throws io::SchemaError.
io::Json load_config(const RunOptions& options);

/// Runs one subcommand, writing results, plot data and manifest.json into
/// the output directory. Returns an exit code; diagnostics go to `log`.
int execute(const RunOptions& options, std::ostream& log);

/// Sets the value at a dotted path, creating objects on the way. The value
/// is parsed as JSON when possible and kept as a string otherwise.
void apply_override(io::Json& config, const std::string& dotted, const std::string& raw);

/// Output directory: --out, then config output_dir, then $ENTRANCE_OUTPUT_DIR,
/// then ./entrance-out.
std::filesystem::path resolve_output_dir(const RunOptions& options, const io::Json& config);

}  // namespace entrance::cli
