#pragma once

// Experiment runner behind the command-line tool. Each run writes its CSV and
// JSON artifacts plus a MANIFEST of SHA-256 hashes into one directory.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tfi/config.hpp"

namespace tfi {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 2;  // sandwich or oracle violation
inline constexpr int kExitUsage = 64;
inline constexpr int kExitFailure = 70;

struct RunResult {
    int exit_code = kExitOk;
    std::vector<std::string> artifacts; // file names relative to the output directory
    std::string message;
};

/// Runs a finalized config; progress goes to `log`.
RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& bytes);

/// Writes `text` with LF line endings; throws std::runtime_error naming the path.
void write_text_file(const std::filesystem::path& path, const std::string& text);

} // namespace tfi
