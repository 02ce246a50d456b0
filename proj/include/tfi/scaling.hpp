#pragma once

// Finite-size scaling of disorder-averaged gap moments at the critical point:
// [Delta^m]_av ~ N^{-m z}, so z = -slope/m of ln[Delta^m]_av against ln N.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tfi/bounds.hpp"
#include "tfi/disorder.hpp"

namespace tfi {

struct GapEnsemble {
    DisorderSpec spec;
    int n = 0;
    std::uint64_t ensemble_seed = 0; // sample i was drawn with SeedTag{ensemble_seed, i}
    std::vector<double> gaps;
};

struct EnsembleOptions {
    unsigned workers = 1;
    bool allow_off_critical = false;
};

/// Seed of the size-n ensemble under a master seed: mix(master ^ mix(n)).
/// Distinct sizes get independent samples; distinct s or gamma with the
/// same master seed share their couplings.
std::uint64_t ensemble_seed(std::uint64_t master_seed, int n);

/// Gaps of `samples` independently seeded chains. Throws ArgumentError when
/// spec.gamma differs from the critical value unless allow_off_critical.
GapEnsemble gap_ensemble(const DisorderSpec& spec, int n, int samples, std::uint64_t master_seed,
                         const EnsembleOptions& options = {});

struct MomentEstimate {
    double ln_moment = 0.0;    // ln [Delta^m]_av
    double ln_stderr = 0.0;    // jackknife
    double mean = 0.0;         // [Delta]_av
    double mean_stderr = 0.0;
};

/// Moments from ln Delta in log-sum-exp form; jackknife error on ln moment.
MomentEstimate log_moment(std::span<const double> gaps, int m);

/// Size range [n_min, n_max] used by one regression.
struct SizeWindow {
    std::string label;
    double n_min = 0.0;
    double n_max = std::numeric_limits<double>::infinity();
};

struct WindowFit {
    SizeWindow window;
    std::size_t points = 0;
    bool valid = false; // needs at least 3 sizes
    double slope = 0.0;
    double slope_stderr = 0.0;
    double intercept = 0.0;
    double z_hat = 0.0;
    double z_stderr = 0.0;
    double chi2 = 0.0;
};

struct ScalingEstimate {
    int m = 1;
    std::vector<int> sizes;
    std::vector<double> ln_moments;
    std::vector<double> ln_stderr;
    std::vector<double> mean_gap;
    std::vector<double> mean_gap_stderr;
    std::vector<std::size_t> samples;
    double z_hat = 0.0; // full range of sizes
    double z_stderr = 0.0;
    WindowFit full;
    std::vector<WindowFit> windows;

    /// Fit for the named window, or the full fit for "full"; nullopt if absent or invalid.
    std::optional<WindowFit> window(const std::string& label) const;
};

/// "large": N >= 1000 r and "small": 100 r <= N <= 1000 r with
/// r = min(1, max_n / 10^4).
std::vector<SizeWindow> default_windows(int max_n);

/// Weighted regression of the ensembles' log moments against ln N.
ScalingEstimate fit_moment_scaling(std::span<const GapEnsemble> ensembles, int m,
                                   std::span<const SizeWindow> windows);

struct ScalingOptions {
    unsigned workers = 1;
    bool allow_off_critical = false;
    std::vector<SizeWindow> windows; // empty: default_windows(max size)
};

/// Needs at least 3 sizes.
ScalingEstimate moment_curve(const DisorderSpec& spec, std::span<const int> sizes, int samples_per_size, int m,
                             std::uint64_t master_seed, const ScalingOptions& options = {});

struct ZRow {
    double s = 0.0;
    double z_hat = 0.0;
    double z_stderr = 0.0;
    ZBounds bounds;
    ScalingEstimate estimate;
};

/// One moment curve per s, all drawn from the same master seed, with z taken
/// from `window_label` ("full", "large" or "small"; falls back to "full" when
/// that window has fewer than 3 sizes).
std::vector<ZRow> z_versus_s(const DisorderSpec& base, std::span<const double> s_grid, std::span<const int> sizes,
                             int samples_per_size, int m, std::uint64_t master_seed,
                             const ScalingOptions& options = {}, const std::string& window_label = "full");

} // namespace tfi
