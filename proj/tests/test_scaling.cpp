#include <doctest.h>

#include <atomic>
#include <cmath>
#include <numbers>
#include <numeric>

#include "tfi/bounds.hpp"
#include "tfi/fit.hpp"
#include "tfi/parallel.hpp"
#include "tfi/scaling.hpp"
#include "tfi/spectrum.hpp"

using namespace tfi;

namespace {

// Plain ordinary least squares slope, written out longhand.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

std::vector<int> sizes_64_to_4096()
{
    std::vector<int> sizes;
    for (int n = 64; n <= 4096; n *= 2)
        sizes.push_back(n);
    return sizes;
}

GapEnsemble uniform_ensemble(int n, int samples)
{
    const ChainSample c = chain_from_couplings(std::vector<double>(static_cast<std::size_t>(n - 1), 1.0), 0.5, 1.0);
    GapEnsemble e{DisorderSpec::weak(0.5, 0.5, 1.0), n, 0, {}};
    e.gaps.assign(static_cast<std::size_t>(samples), energy_gap(build_bidiagonal(c)));
    return e;
}

} // namespace

TEST_CASE("log moment matches a direct average and its jackknife")
{
    const std::vector<double> gaps{0.3, 0.01, 1.2, 0.07, 0.5, 0.002};
    for (int m : {1, 2, 3}) {
        double direct = 0.0;
        for (double g : gaps)
            direct += std::pow(g, m);
        direct /= gaps.size();
        const MomentEstimate e = log_moment(gaps, m);
        CHECK(e.ln_moment == doctest::Approx(std::log(direct)).epsilon(1e-13));

        std::vector<double> loo;
        for (std::size_t i = 0; i < gaps.size(); ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < gaps.size(); ++j)
                if (j != i)
                    s += std::pow(gaps[j], m);
            loo.push_back(std::log(s / (gaps.size() - 1.0)));
        }
        const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / loo.size();
        double ss = 0.0;
        for (double v : loo)
            ss += (v - mean) * (v - mean);
        CHECK(e.ln_stderr == doctest::Approx(std::sqrt((loo.size() - 1.0) / loo.size() * ss)).epsilon(1e-10));
    }
    CHECK(log_moment(gaps, 1).mean == doctest::Approx(std::accumulate(gaps.begin(), gaps.end(), 0.0) / 6));
    CHECK_THROWS_AS(log_moment(std::vector<double>{1.0}, 1), ArgumentError);
    CHECK_THROWS_AS(log_moment(gaps, 0), ArgumentError);
}

TEST_CASE("log moment survives gaps far below the double range when raised to m")
{
    const std::vector<double> gaps{1e-200, 2e-200, 3e-200};
    const MomentEstimate e = log_moment(gaps, 3);
    const double expected = std::log((1.0 + 8.0 + 27.0) / 3.0) + 3.0 * std::log(1e-200);
    CHECK(e.ln_moment == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("uniform chain scaling: estimator equals longhand slope and z is near one")
{
    const auto sizes = sizes_64_to_4096();
    for (int m : {1, 2}) {
        std::vector<GapEnsemble> ensembles;
        std::vector<double> x, y;
        for (int n : sizes) {
            ensembles.push_back(uniform_ensemble(n, 4));
            x.push_back(std::log(n));
            const double gap = 2.0 * std::sqrt(2.0 - 2.0 * std::cos(std::numbers::pi / (2.0 * n + 1.0)));
            y.push_back(m * std::log(gap));
        }
        const ScalingEstimate e = fit_moment_scaling(ensembles, m, {});
        for (double se : e.ln_stderr)
            CHECK(se == 0.0);
        CHECK(e.z_hat == doctest::Approx(-ols_slope(x, y) / m).epsilon(1e-6));
        CHECK(std::abs(e.z_hat - 1.0) < 0.01);
    }
    std::vector<GapEnsemble> ensembles;
    for (int n : sizes)
        ensembles.push_back(uniform_ensemble(n, 4));
    CHECK(fit_moment_scaling(ensembles, 1, {}).z_hat ==
          doctest::Approx(fit_moment_scaling(ensembles, 2, {}).z_hat).epsilon(1e-6));
}

TEST_CASE("synthetic power-law gaps recover the exponent within 2 sigma")
{
    for (double z0 : {1.0, 1.5, 2.0}) {
        std::vector<GapEnsemble> ensembles;
        for (int n : sizes_64_to_4096()) {
            GapEnsemble e{DisorderSpec::strong(1.0, 0.5, 1.0), n, 0, {}};
            SampleStream u(static_cast<std::uint64_t>(z0 * 10), static_cast<std::uint64_t>(n));
            for (int k = 0; k < 500; ++k)
                e.gaps.push_back(0.7 * std::pow(n, -z0) * (1.0 + 0.4 * (u.next_unit() - 0.5)));
            ensembles.push_back(e);
        }
        const ScalingEstimate est = fit_moment_scaling(ensembles, 1, {});
        CAPTURE(z0);
        CHECK(std::abs(est.z_hat - z0) <= 2.0 * est.z_stderr);
        CHECK(est.z_stderr > 0.0);
    }
}

TEST_CASE("moment curve needs three sizes")
{
    const std::vector<int> two{16, 32};
    CHECK_THROWS_AS(moment_curve(DisorderSpec::strong(1.0, 0.5, 1.0), two, 10, 1, 1), ArgumentError);
}

TEST_CASE("gap ensembles are reproducible and worker independent")
{
    const DisorderSpec spec = DisorderSpec::strong(1.0, 0.3, 1.0);
    const GapEnsemble a = gap_ensemble(spec, 100, 50, 5, EnsembleOptions{1});
    const GapEnsemble b = gap_ensemble(spec, 100, 50, 5, EnsembleOptions{8});
    CHECK(a.gaps == b.gaps);
    CHECK(a.ensemble_seed == ensemble_seed(5, 100));
    for (std::size_t i = 0; i < a.gaps.size(); ++i) {
        const ChainSample c = sample_chain(spec, 100, SeedTag{a.ensemble_seed, i});
        CHECK(a.gaps[i] == energy_gap(build_bidiagonal(c)));
    }
    CHECK(ensemble_seed(5, 100) != ensemble_seed(5, 101));
    CHECK(ensemble_seed(5, 100) != ensemble_seed(6, 100));
}

TEST_CASE("off-critical ensembles need an explicit override")
{
    const DisorderSpec spec = DisorderSpec::strong(1.0, 0.5, 1.2);
    CHECK_THROWS_AS(gap_ensemble(spec, 20, 5, 1), ArgumentError);
    CHECK(gap_ensemble(spec, 20, 5, 1, EnsembleOptions{1, true}).gaps.size() == 5);
}

TEST_CASE("weak disorder gaps lie between the analytic bounds")
{
    const DisorderSpec spec = DisorderSpec::weak(0.5, 0.5, 1.0);
    const GapEnsemble e = gap_ensemble(spec, 100, 100, 12);
    const double lower = weak_moment_lower_bound(0.5, 100, 1);
    for (std::size_t i = 0; i < e.gaps.size(); ++i) {
        const ChainSample c = sample_chain(spec, 100, SeedTag{e.ensemble_seed, i});
        CHECK(e.gaps[i] >= lower * (1.0 - 1e-12));
        CHECK(e.gaps[i] <= variational_upper_bound(c).upper() * (1.0 + 1e-12));
    }
}

TEST_CASE("default windows scale with the largest size")
{
    auto w = default_windows(20000);
    REQUIRE(w.size() == 2);
    CHECK(w[0].label == "large");
    CHECK(w[0].n_min == 1000.0);
    CHECK(std::isinf(w[0].n_max));
    CHECK(w[1].n_min == 100.0);
    CHECK(w[1].n_max == 1000.0);
    w = default_windows(4096);
    CHECK(w[0].n_min == doctest::Approx(409.6));
    CHECK(w[1].n_min == doctest::Approx(40.96));
}

TEST_CASE("windows with fewer than three sizes are invalid and z-vs-s falls back to the full fit")
{
    const std::vector<int> sizes{16, 32, 64, 128};
    ScalingOptions opt;
    opt.windows = {SizeWindow{"tail", 100, 1e9}, SizeWindow{"head", 16, 64}};
    const ScalingEstimate e = moment_curve(DisorderSpec::strong(1.0, 0.5, 1.0), sizes, 40, 1, 3, opt);
    CHECK_FALSE(e.window("tail").has_value());
    REQUIRE(e.window("head").has_value());
    CHECK(e.window("head")->points == 3);
    CHECK(e.window("full")->points == 4);

    const std::vector<double> grid{0.2};
    const auto rows = z_versus_s(DisorderSpec::strong(1.0, 0.5, 1.0), grid, sizes, 40, 1, 3, opt, "tail");
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].z_hat == rows[0].estimate.full.z_hat);
    CHECK(rows[0].bounds.lower == doctest::Approx(1.3));
}

TEST_CASE("least squares: weighted line, covariance and fallback")
{
    const std::vector<double> x{0, 1, 2, 3, 4};
    const std::vector<double> y{1, 3, 5, 7, 9};
    LinearFit f = line_fit(x, y);
    CHECK(f.params(0) == doctest::Approx(1.0));
    CHECK(f.params(1) == doctest::Approx(2.0));
    CHECK(f.residual_norm < 1e-12);

    // Weighted fit with unit errors: covariance (XᵀX)^-1 and chi2 = RSS.
    const std::vector<double> yn{1.1, 2.9, 5.2, 6.8, 9.1};
    const std::vector<double> ones(5, 1.0);
    f = line_fit(x, yn, ones);
    CHECK(f.covariance(1, 1) == doctest::Approx(std::max(1.0, f.chi2 / 3.0) / 10.0));
    CHECK(f.dof == 3);

    const std::vector<double> with_zero{1.0, 0.0, 1.0, 1.0, 1.0};
    const LinearFit fallback = line_fit(x, yn, with_zero);
    CHECK(fallback.params(1) == doctest::Approx(ols_slope(x, yn)));
}

TEST_CASE("pairwise sum is exact on representable data")
{
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = static_cast<double>(i);
    CHECK(pairwise_sum(v) == 499500.0);
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("parallel_for visits every index and rethrows the lowest failure")
{
    std::vector<std::atomic<int>> hits(100);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i]++; });
    for (auto& h : hits)
        CHECK(h.load() == 1);
    try {
        parallel_for(50, 4, [](std::size_t i) {
            if (i == 13 || i == 40)
                throw std::runtime_error(std::to_string(i));
        });
        FAIL("expected a throw");
    } catch (const std::runtime_error& e) {
        CHECK(std::string(e.what()) == "13");
    }
}
