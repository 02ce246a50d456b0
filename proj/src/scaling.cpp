#include "tfi/scaling.hpp"

#include <algorithm>
#include <cmath>

#include "tfi/fit.hpp"
#include "tfi/parallel.hpp"
#include "tfi/spectrum.hpp"

namespace tfi {

std::uint64_t ensemble_seed(std::uint64_t master_seed, int n)
{
    return splitmix64_mix(master_seed ^ splitmix64_mix(static_cast<std::uint64_t>(n)));
}

GapEnsemble gap_ensemble(const DisorderSpec& spec, int n, int samples, std::uint64_t master_seed,
                         const EnsembleOptions& options)
{
    spec.validate();
    if (samples < 1)
        throw ArgumentError("ensemble needs at least one sample");
    if (!options.allow_off_critical && spec.gamma != critical_gamma(spec).gamma_c)
        throw ArgumentError("gap ensembles for exponent work must sit at gamma_c = 1");

    GapEnsemble ensemble{spec, n, ensemble_seed(master_seed, n), {}};
    ensemble.gaps.resize(static_cast<std::size_t>(samples));
    parallel_for(ensemble.gaps.size(), options.workers, [&](std::size_t i) {
        const ChainSample chain = sample_chain(spec, n, SeedTag{ensemble.ensemble_seed, i});
        const double gap = energy_gap(build_bidiagonal(chain));
        if (!(gap > 0.0))
            throw NumericError("gap underflowed for sample " + std::to_string(i) + " at N=" + std::to_string(n));
        ensemble.gaps[i] = gap;
    });
    return ensemble;
}

MomentEstimate log_moment(std::span<const double> gaps, int m)
{
    if (gaps.size() < 2)
        throw ArgumentError("moment estimate needs at least two gaps");
    if (m < 1)
        throw ArgumentError("moment order must be >= 1");
    const std::size_t count = gaps.size();
    const double s = static_cast<double>(count);

    std::vector<double> log_terms(count);
    for (std::size_t i = 0; i < count; ++i) {
        if (!(gaps[i] > 0.0))
            throw ArgumentError("gaps must be positive");
        log_terms[i] = m * std::log(gaps[i]);
    }
    const double peak = *std::max_element(log_terms.begin(), log_terms.end());
    std::vector<double> scaled(count);
    for (std::size_t i = 0; i < count; ++i)
        scaled[i] = std::exp(log_terms[i] - peak);
    const double total = pairwise_sum(scaled);

    MomentEstimate est;
    est.ln_moment = peak + std::log(total) - std::log(s);

    // Leave-one-out log moments.
    std::vector<double> loo(count);
    for (std::size_t i = 0; i < count; ++i) {
        const double rest = std::max(total - scaled[i], total * 1e-300);
        loo[i] = peak + std::log(rest) - std::log(s - 1.0);
    }
    const double loo_mean = pairwise_sum(loo) / s;
    std::vector<double> dev2(count);
    for (std::size_t i = 0; i < count; ++i)
        dev2[i] = (loo[i] - loo_mean) * (loo[i] - loo_mean);
    est.ln_stderr = std::sqrt((s - 1.0) / s * pairwise_sum(dev2));

    est.mean = pairwise_sum(gaps) / s;
    for (std::size_t i = 0; i < count; ++i)
        dev2[i] = (gaps[i] - est.mean) * (gaps[i] - est.mean);
    est.mean_stderr = std::sqrt(pairwise_sum(dev2) / (s - 1.0) / s);
    return est;
}

std::optional<WindowFit> ScalingEstimate::window(const std::string& label) const
{
    if (label == "full")
        return full.valid ? std::optional<WindowFit>(full) : std::nullopt;
    for (const auto& w : windows)
        if (w.window.label == label)
            return w.valid ? std::optional<WindowFit>(w) : std::nullopt;
    return std::nullopt;
}

std::vector<SizeWindow> default_windows(int max_n)
{
    const double r = std::min(1.0, max_n / 1e4);
    return {SizeWindow{"large", 1000.0 * r, std::numeric_limits<double>::infinity()},
            SizeWindow{"small", 100.0 * r, 1000.0 * r}};
}

namespace {

WindowFit fit_window(const ScalingEstimate& est, const SizeWindow& window)
{
    WindowFit fit;
    fit.window = window;
    std::vector<double> x, y, se;
    for (std::size_t i = 0; i < est.sizes.size(); ++i) {
        const double n = est.sizes[i];
        if (n < window.n_min || n > window.n_max)
            continue;
        x.push_back(std::log(n));
        y.push_back(est.ln_moments[i]);
        se.push_back(est.ln_stderr[i]);
    }
    fit.points = x.size();
    if (x.size() < 3)
        return fit;
    const LinearFit line = line_fit(x, y, se);
    fit.valid = true;
    fit.intercept = line.params(0);
    fit.slope = line.params(1);
    fit.slope_stderr = line.stderrs(1);
    fit.z_hat = -fit.slope / est.m;
    fit.z_stderr = fit.slope_stderr / est.m;
    fit.chi2 = line.chi2;
    return fit;
}

} // namespace

ScalingEstimate fit_moment_scaling(std::span<const GapEnsemble> ensembles, int m, std::span<const SizeWindow> windows)
{
    if (ensembles.size() < 3)
        throw ArgumentError("moment scaling needs at least 3 sizes");
    ScalingEstimate est;
    est.m = m;
    std::vector<const GapEnsemble*> ordered;
    for (const auto& e : ensembles)
        ordered.push_back(&e);
    std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->n < b->n; });
    for (const GapEnsemble* e : ordered) {
        const MomentEstimate mom = log_moment(e->gaps, m);
        est.sizes.push_back(e->n);
        est.ln_moments.push_back(mom.ln_moment);
        est.ln_stderr.push_back(mom.ln_stderr);
        est.mean_gap.push_back(mom.mean);
        est.mean_gap_stderr.push_back(mom.mean_stderr);
        est.samples.push_back(e->gaps.size());
    }
    est.full = fit_window(est, SizeWindow{"full", 0.0, std::numeric_limits<double>::infinity()});
    if (!est.full.valid)
        throw ArgumentError("moment scaling needs at least 3 sizes");
    est.z_hat = est.full.z_hat;
    est.z_stderr = est.full.z_stderr;
    for (const auto& w : windows)
        est.windows.push_back(fit_window(est, w));
    return est;
}

ScalingEstimate moment_curve(const DisorderSpec& spec, std::span<const int> sizes, int samples_per_size, int m,
                             std::uint64_t master_seed, const ScalingOptions& options)
{
    if (sizes.size() < 3)
        throw ArgumentError("moment_curve needs at least 3 sizes, got " + std::to_string(sizes.size()));
    std::vector<GapEnsemble> ensembles;
    ensembles.reserve(sizes.size());
    for (int n : sizes)
        ensembles.push_back(gap_ensemble(spec, n, samples_per_size, master_seed,
                                         EnsembleOptions{options.workers, options.allow_off_critical}));
    const int max_n = *std::max_element(sizes.begin(), sizes.end());
    const auto windows = options.windows.empty() ? default_windows(max_n) : options.windows;
    return fit_moment_scaling(ensembles, m, windows);
}

std::vector<ZRow> z_versus_s(const DisorderSpec& base, std::span<const double> s_grid, std::span<const int> sizes,
                             int samples_per_size, int m, std::uint64_t master_seed, const ScalingOptions& options,
                             const std::string& window_label)
{
    std::vector<ZRow> rows;
    for (double s : s_grid) {
        const DisorderSpec spec = base.with_s(s);
        ZRow row;
        row.s = s;
        row.bounds = z_bounds(spec);
        row.estimate = moment_curve(spec, sizes, samples_per_size, m, master_seed, options);
        const auto fit = row.estimate.window(window_label);
        const WindowFit& chosen = fit ? *fit : row.estimate.full;
        row.z_hat = chosen.z_hat;
        row.z_stderr = chosen.z_stderr;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace tfi
