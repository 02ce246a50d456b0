#pragma once

// Flat key = value experiment configuration. '#' starts a comment; list
// values are comma separated; `window` may repeat as "label n_min n_max".

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tfi/disorder.hpp"
#include "tfi/errors.hpp"
#include "tfi/scaling.hpp"

namespace tfi {

enum class ExperimentKind { gap_scaling, z_vs_s, correlation, bounds_check, oracle_check };

std::string to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment_kind(const std::string& name);

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& origin, int line, const std::string& field, const std::string& message);

    std::string origin;
    int line; // 0 when the problem is not tied to one line
    std::string field;
};

struct ExperimentConfig {
    std::optional<ExperimentKind> experiment;
    std::string disorder = "strong"; // strong | weak
    double d = 1.0;
    double j0 = 0.5;
    double s = 0.5;
    double gamma = 1.0;

    std::vector<int> sizes;
    int samples = 1000;
    int m = 1;
    std::vector<double> s_grid;
    std::vector<SizeWindow> windows; // empty: defaults scaled to the largest size
    std::string z_window = "full";

    int n = 2000;                    // correlation chain length
    int realizations = 20;
    int x_max = 0;                   // 0 or absent: n/2 - 1
    std::vector<double> gamma_offsets;
    int fit_x_min = 5;
    std::optional<int> fit_x_max;
    double fit_snr = 2.0;
    double fit_noise_floor = 1e-12;
    double max_nonpositive_fraction = 0.1;

    double bound_slack = 1e-10;
    int oracle_samples = 50;
    std::vector<double> oracle_gammas = {0.5, 1.0, 2.0};
    int oracle_min_n = 2;
    int oracle_max_n = 10;
    double oracle_tolerance = 1e-8;

    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::string out;
    bool fast = false;
    bool emit_bounds = false;

    DisorderSpec spec() const;
};

/// Parses config text; throws ConfigError naming the line and field.
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");

ExperimentConfig load_config(const std::string& path);

/// Fills defaults that depend on the experiment and checks cross-field
/// constraints (seed present, sizes given, ranges). Throws ConfigError.
void finalize_config(ExperimentConfig& config, ExperimentKind kind, const std::string& origin = "<config>");

/// Canonical key = value rendering of every field; hashed into the manifest.
std::string canonical_config(const ExperimentConfig& config);

} // namespace tfi
