#include "tfi/correlation.hpp"

#include <algorithm>
#include <cmath>

#include "tfi/fit.hpp"
#include "tfi/parallel.hpp"
#include "tfi/scaling.hpp"

namespace tfi {

double SignedLog::value() const
{
    if (sign == 0)
        return 0.0;
    return sign * std::exp(log_abs);
}

SignedLog log_determinant(const Eigen::MatrixXd& m)
{
    if (m.rows() != m.cols())
        throw ArgumentError("determinant of a non-square matrix");
    SignedLog out;
    if (m.rows() == 0) {
        out.sign = 1;
        out.log_abs = 0.0;
        return out;
    }
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(m);
    int sign = static_cast<int>(lu.permutationP().determinant());
    double log_abs = 0.0;
    const auto& packed = lu.matrixLU();
    for (Eigen::Index k = 0; k < packed.rows(); ++k) {
        const double u = packed(k, k);
        if (u == 0.0)
            return SignedLog{};
        if (u < 0.0)
            sign = -sign;
        log_abs += std::log(std::abs(u));
    }
    out.sign = sign;
    out.log_abs = log_abs;
    return out;
}

Eigen::MatrixXd correlation_block(const FermionModes& modes, int i, int width)
{
    const auto n = static_cast<int>(modes.lambdas.size());
    if (i < 0 || width < 1 || i + width >= n)
        throw ArgumentError("correlation block exceeds the chain");
    // psi rows i..i+width-1 against phi columns i+1..i+width, summed over modes.
    return -(modes.psi.middleCols(i, width).transpose() * modes.phi.middleCols(i + 1, width));
}

SignedLog correlation_log(const FermionModes& modes, int i, int j)
{
    const auto n = static_cast<int>(modes.lambdas.size());
    if (!(i >= 0 && i < j && j < n))
        throw ArgumentError("correlation needs 0 <= i < j < N, got i=" + std::to_string(i) +
                            " j=" + std::to_string(j));
    const Eigen::MatrixXd g = correlation_block(modes, i, j - i);
    if (j - i == 1) {
        const double v = g(0, 0);
        return v == 0.0 ? SignedLog{} : SignedLog{v > 0.0 ? 1 : -1, std::log(std::abs(v))};
    }
    return log_determinant(g);
}

double correlation_value(const FermionModes& modes, int i, int j)
{
    return correlation_log(modes, i, j).value();
}

std::vector<SignedLog> correlation_curve(const ChainSample& sample, int x_max)
{
    if (x_max < 1 || x_max > sample.n / 2 - 1)
        throw ArgumentError("x_max must lie in [1, N/2 - 1], got " + std::to_string(x_max));
    const FermionModes modes = full_modes(build_bidiagonal(sample));
    const int anchor = sample.n / 2 - 1;
    const Eigen::MatrixXd block = correlation_block(modes, anchor, x_max);
    std::vector<SignedLog> curve(static_cast<std::size_t>(x_max));
    for (int x = 1; x <= x_max; ++x)
        curve[static_cast<std::size_t>(x - 1)] = log_determinant(block.topLeftCorner(x, x));
    return curve;
}

CorrelationProfile aggregate_profile(std::vector<std::vector<SignedLog>> per_sample)
{
    if (per_sample.empty())
        throw ArgumentError("profile needs at least one sample");
    const std::size_t samples = per_sample.size();
    const std::size_t width = per_sample.front().size();
    CorrelationProfile p;
    p.sample_count = static_cast<int>(samples);
    p.sample_c.assign(samples, std::vector<double>(width));
    p.sample_ln_c.assign(samples, std::vector<double>(width));
    for (std::size_t k = 0; k < samples; ++k) {
        if (per_sample[k].size() != width)
            throw ArgumentError("per-sample curves differ in length");
        for (std::size_t x = 0; x < width; ++x) {
            const SignedLog& c = per_sample[k][x];
            p.sample_c[k][x] = c.value();
            p.sample_ln_c[k][x] = c.sign > 0 ? c.log_abs : std::numeric_limits<double>::quiet_NaN();
        }
    }

    std::vector<double> column;
    for (std::size_t x = 0; x < width; ++x) {
        p.distances.push_back(static_cast<int>(x + 1));

        column.clear();
        for (std::size_t k = 0; k < samples; ++k)
            column.push_back(p.sample_c[k][x]);
        const double mean = pairwise_sum(column) / samples;
        for (double& v : column)
            v = (v - mean) * (v - mean);
        p.c_ave.push_back(mean);
        p.c_ave_stderr.push_back(samples > 1 ? std::sqrt(pairwise_sum(column) / (samples - 1.0) / samples) : 0.0);

        column.clear();
        for (std::size_t k = 0; k < samples; ++k)
            if (!std::isnan(p.sample_ln_c[k][x]))
                column.push_back(p.sample_ln_c[k][x]);
        const std::size_t used = column.size();
        p.n_excluded.push_back(static_cast<int>(samples - used));
        if (used == 0) {
            p.ln_c_typ.push_back(std::numeric_limits<double>::quiet_NaN());
            p.ln_c_typ_stderr.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        const double ln_mean = pairwise_sum(column) / used;
        for (double& v : column)
            v = (v - ln_mean) * (v - ln_mean);
        p.ln_c_typ.push_back(ln_mean);
        p.ln_c_typ_stderr.push_back(used > 1 ? std::sqrt(pairwise_sum(column) / (used - 1.0) / used) : 0.0);
    }
    return p;
}

CorrelationProfile correlation_profile(const DisorderSpec& spec, int n, int x_max, int samples, std::uint64_t seed,
                                       const ProfileOptions& options)
{
    spec.validate();
    if (x_max < 1 || x_max > n / 2 - 1)
        throw ArgumentError("x_max must lie in [1, N/2 - 1], got " + std::to_string(x_max));
    if (samples < 1)
        throw ArgumentError("profile needs at least one sample");
    if (static_cast<std::size_t>(n) > options.dense_limit)
        throw CapabilityError("correlation profile needs full modes; N exceeds the dense limit");

    const std::uint64_t base = ensemble_seed(seed, n);
    std::vector<std::vector<SignedLog>> curves(static_cast<std::size_t>(samples));
    parallel_for(curves.size(), options.workers, [&](std::size_t k) {
        curves[k] = correlation_curve(sample_chain(spec, n, SeedTag{base, k}), x_max);
    });
    return aggregate_profile(std::move(curves));
}

std::string to_string(CorrelationKind kind)
{
    return kind == CorrelationKind::average ? "average" : "typical";
}

FitDegradedError::FitDegradedError(const std::string& message, int lo, int hi, std::size_t ok, std::size_t bad)
    : NumericError(message + " (window [" + std::to_string(lo) + ", " + std::to_string(hi) + "], usable " +
                   std::to_string(ok) + ", non-positive " + std::to_string(bad) + ")"),
      x_min(lo), x_max(hi), usable(ok), nonpositive(bad)
{
}

std::pair<int, int> fit_window(const CorrelationProfile& profile, const FitOptions& options)
{
    if (profile.distances.empty())
        throw ArgumentError("empty correlation profile");
    const int last = profile.distances.back();
    const int lo = std::max(options.x_min, profile.distances.front());
    if (options.x_max)
        return {lo, std::min(*options.x_max, last)};
    int hi = lo - 1;
    for (std::size_t k = 0; k < profile.distances.size(); ++k) {
        const int x = profile.distances[k];
        if (x < lo)
            continue;
        const double c = profile.c_ave[k];
        if (c <= options.noise_floor || c <= options.signal_to_noise * profile.c_ave_stderr[k])
            break;
        hi = x;
    }
    return {lo, hi};
}

namespace {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> se;
};

LinearFit fit_series(const Series& s)
{
    const auto rows = static_cast<Eigen::Index>(s.x.size());
    Eigen::MatrixXd design(rows, 3);
    Eigen::VectorXd y(rows);
    bool weighted = true;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto k = static_cast<std::size_t>(r);
        design(r, 0) = 1.0;
        design(r, 1) = -s.x[k];
        design(r, 2) = -std::log(s.x[k]);
        y(r) = s.y[k];
        if (!(s.se[k] > 0.0) || !std::isfinite(s.se[k]))
            weighted = false;
    }
    if (!weighted)
        return least_squares(design, y);
    Eigen::VectorXd w(rows);
    for (Eigen::Index r = 0; r < rows; ++r)
        w(r) = 1.0 / (s.se[static_cast<std::size_t>(r)] * s.se[static_cast<std::size_t>(r)]);
    return least_squares(design, y, w);
}

// ln of the mean over samples except `skip` (or all when skip < 0).
double loo_value(const CorrelationProfile& p, CorrelationKind kind, std::size_t column, long skip)
{
    std::vector<double> vals;
    for (std::size_t k = 0; k < p.sample_c.size(); ++k) {
        if (static_cast<long>(k) == skip)
            continue;
        const double v = kind == CorrelationKind::average ? p.sample_c[k][column] : p.sample_ln_c[k][column];
        if (kind == CorrelationKind::typical && std::isnan(v))
            continue;
        vals.push_back(v);
    }
    if (vals.empty())
        return std::numeric_limits<double>::quiet_NaN();
    const double mean = pairwise_sum(vals) / vals.size();
    if (kind == CorrelationKind::typical)
        return mean;
    return mean > 0.0 ? std::log(mean) : std::numeric_limits<double>::quiet_NaN();
}

} // namespace

FitResult fit_correlation_length(const CorrelationProfile& profile, CorrelationKind kind, const FitOptions& options)
{
    const auto [lo, hi] = fit_window(profile, options);

    Series series;
    std::vector<std::size_t> columns;
    std::size_t in_window = 0;
    std::size_t nonpositive = 0;
    for (std::size_t k = 0; k < profile.distances.size(); ++k) {
        const int x = profile.distances[k];
        if (x < lo || x > hi)
            continue;
        ++in_window;
        double y = 0.0;
        double se = 0.0;
        if (kind == CorrelationKind::average) {
            if (!(profile.c_ave[k] > 0.0)) {
                ++nonpositive;
                continue;
            }
            y = std::log(profile.c_ave[k]);
            se = profile.c_ave_stderr[k] / profile.c_ave[k];
        } else {
            if (std::isnan(profile.ln_c_typ[k])) {
                ++nonpositive;
                continue;
            }
            y = profile.ln_c_typ[k];
            se = profile.ln_c_typ_stderr[k];
        }
        series.x.push_back(x);
        series.y.push_back(y);
        series.se.push_back(se);
        columns.push_back(k);
    }
    if (in_window > 0 && static_cast<double>(nonpositive) > options.max_nonpositive_fraction * in_window)
        throw FitDegradedError("too many non-positive correlation values in the fit window", lo, hi,
                               series.x.size(), nonpositive);
    if (static_cast<int>(series.x.size()) < options.min_points)
        throw FitDegradedError("too few usable distances in the fit window", lo, hi, series.x.size(), nonpositive);

    const LinearFit fit = fit_series(series);
    FitResult r;
    r.kind = kind;
    r.log_amplitude = fit.params(0);
    r.inv_xi = fit.params(1);
    r.eta = fit.params(2);
    r.covariance = fit.covariance;
    r.log_amplitude_stderr = fit.stderrs(0);
    r.inv_xi_stderr = fit.stderrs(1);
    r.eta_stderr = fit.stderrs(2);
    if (r.inv_xi > 0.0) {
        r.xi = 1.0 / r.inv_xi;
        r.xi_stderr = r.inv_xi_stderr / (r.inv_xi * r.inv_xi);
    }
    r.x_min = lo;
    r.x_max = hi;
    r.points = series.x.size();
    r.residual_norm = fit.residual_norm;

    const std::size_t samples = profile.sample_c.size();
    if (samples >= 3) {
        std::vector<double> inv, xis, etas;
        for (std::size_t skip = 0; skip < samples; ++skip) {
            Series loo;
            for (std::size_t q = 0; q < columns.size(); ++q) {
                const double y = loo_value(profile, kind, columns[q], static_cast<long>(skip));
                if (std::isnan(y))
                    continue;
                loo.x.push_back(series.x[q]);
                loo.y.push_back(y);
                loo.se.push_back(series.se[q]);
            }
            if (static_cast<int>(loo.x.size()) < options.min_points)
                continue;
            const LinearFit f = fit_series(loo);
            inv.push_back(f.params(1));
            xis.push_back(1.0 / f.params(1));
            etas.push_back(f.params(2));
        }
        auto jackknife = [](const std::vector<double>& v) {
            const double m = static_cast<double>(v.size());
            if (v.size() < 2)
                return std::numeric_limits<double>::quiet_NaN();
            const double mean = pairwise_sum(v) / m;
            std::vector<double> d2(v.size());
            for (std::size_t i = 0; i < v.size(); ++i)
                d2[i] = (v[i] - mean) * (v[i] - mean);
            return std::sqrt((m - 1.0) / m * pairwise_sum(d2));
        };
        r.inv_xi_jackknife_stderr = jackknife(inv);
        r.eta_jackknife_stderr = jackknife(etas);
        if (r.inv_xi > 0.0)
            r.xi_jackknife_stderr = r.inv_xi_jackknife_stderr / (r.inv_xi * r.inv_xi);
    }
    return r;
}

PowerLawFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y,
                          const std::vector<double>& y_stderr)
{
    if (x.size() < 2 || x.size() != y.size())
        throw ArgumentError("power-law fit needs matching x and y with at least 2 points");
    std::vector<double> lx, ly, lse;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw ArgumentError("power-law fit needs positive data");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
        if (!y_stderr.empty())
            lse.push_back(y_stderr[i] / y[i]);
    }
    const LinearFit f = line_fit(lx, ly, lse);
    return PowerLawFit{f.params(1), f.stderrs(1), f.params(0)};
}

} // namespace tfi
