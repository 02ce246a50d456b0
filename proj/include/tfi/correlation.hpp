#pragma once

// Ground-state spin correlations from the Bogoliubov modes and their
// disorder averages.
//
//   C_{i,j} = <sigma^z_i sigma^z_j> = det G_{i,j},
//   [G_{i,j}]_{kl} = -sum_n psi_{n,i+k-1} phi_{n,i+l},  k,l = 1..j-i.
//
// Site indices in this interface are 0-based; site N/2 of the usual 1-based
// labelling is index N/2 - 1.

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tfi/disorder.hpp"
#include "tfi/spectrum.hpp"

namespace tfi {

/// Determinant as sign * exp(log_abs); sign 0 means exactly singular.
struct SignedLog {
    int sign = 0;
    double log_abs = -std::numeric_limits<double>::infinity();

    double value() const;
};

/// Partial-pivot LU determinant in sign/log-magnitude form.
SignedLog log_determinant(const Eigen::MatrixXd& m);

/// G block anchored at site i with `width` rows: entry (k, l) couples the
/// Majorana pair at sites i+k and i+l+1. Its leading x-by-x minor is C_{i,i+x}.
Eigen::MatrixXd correlation_block(const FermionModes& modes, int i, int width);

SignedLog correlation_log(const FermionModes& modes, int i, int j);

/// C_{i,j} for 0 <= i < j < N; throws ArgumentError otherwise.
double correlation_value(const FermionModes& modes, int i, int j);

struct CorrelationProfile {
    std::vector<int> distances;          // 1..x_max
    std::vector<double> c_ave;           // [C]_av
    std::vector<double> c_ave_stderr;
    std::vector<double> ln_c_typ;        // [ln C]_av over samples with C > 0
    std::vector<double> ln_c_typ_stderr;
    std::vector<int> n_excluded;         // samples with C <= 0 at that distance
    int sample_count = 0;

    // Per-sample values, [sample][distance index]; kept for jackknife fits.
    std::vector<std::vector<double>> sample_c;
    std::vector<std::vector<double>> sample_ln_c; // NaN where C <= 0
};

/// Aggregates per-sample correlation curves into a profile.
CorrelationProfile aggregate_profile(std::vector<std::vector<SignedLog>> per_sample);

/// Correlation curve C_{a, a+x}, x = 1..x_max, of one chain; a = N/2 - 1.
std::vector<SignedLog> correlation_curve(const ChainSample& sample, int x_max);

struct ProfileOptions {
    unsigned workers = 1;
    std::size_t dense_limit = kDefaultDenseLimit;
};

/// Average and typical correlation at distances 1..x_max from the central
/// site, over `samples` chains seeded by SeedTag{ensemble_seed(seed, n), k}.
/// x_max must satisfy 1 <= x_max <= n/2 - 1.
CorrelationProfile correlation_profile(const DisorderSpec& spec, int n, int x_max, int samples, std::uint64_t seed,
                                       const ProfileOptions& options = {});

enum class CorrelationKind { average, typical };

std::string to_string(CorrelationKind kind);

struct FitOptions {
    int x_min = 5;
    std::optional<int> x_max;          // overrides the automatic cutoff
    double signal_to_noise = 2.0;       // cutoff where c_ave drops below this many stderr
    double noise_floor = 1e-12;         // distances with c_ave below this are never fitted
    double max_nonpositive_fraction = 0.1;
    int min_points = 4;
};

/// Model ln C(x) = a - x/xi - eta ln x.
struct FitResult {
    CorrelationKind kind = CorrelationKind::average;
    double log_amplitude = 0.0;
    double inv_xi = 0.0;
    double eta = 0.0;
    double log_amplitude_stderr = 0.0;
    double inv_xi_stderr = 0.0;
    double eta_stderr = 0.0;
    Eigen::Matrix3d covariance = Eigen::Matrix3d::Zero();
    double xi = std::numeric_limits<double>::infinity(); // 1/inv_xi when inv_xi > 0
    double xi_stderr = std::numeric_limits<double>::quiet_NaN();
    // Disorder scatter: leave-one-sample-out jackknife of the whole fit.
    double inv_xi_jackknife_stderr = std::numeric_limits<double>::quiet_NaN();
    double xi_jackknife_stderr = std::numeric_limits<double>::quiet_NaN();
    double eta_jackknife_stderr = std::numeric_limits<double>::quiet_NaN();
    int x_min = 0;
    int x_max = 0;
    std::size_t points = 0;
    double residual_norm = 0.0;
};

/// Window rejected: too many non-positive averages or too few points.
class FitDegradedError : public NumericError {
public:
    FitDegradedError(const std::string& message, int x_min, int x_max, std::size_t usable, std::size_t nonpositive);

    int x_min;
    int x_max;
    std::size_t usable;
    std::size_t nonpositive;
};

/// Window: x in [x_min, x_cut) where x_cut is the first distance >= x_min with
/// c_ave <= signal_to_noise * c_ave_stderr or c_ave <= noise_floor, unless
/// options.x_max is set. The same window is used for both kinds.
std::pair<int, int> fit_window(const CorrelationProfile& profile, const FitOptions& options);

FitResult fit_correlation_length(const CorrelationProfile& profile, CorrelationKind kind,
                                 const FitOptions& options = {});

/// ln y = c + exponent * ln x.
struct PowerLawFit {
    double exponent = 0.0;
    double exponent_stderr = 0.0;
    double log_prefactor = 0.0;
};

/// y_stderr may be empty (unweighted).
PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& y_stderr = {});

} // namespace tfi
