// Acceptance run: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>

#include <json.hpp>

#include "tfi/bounds.hpp"
#include "tfi/config.hpp"
#include "tfi/correlation.hpp"
#include "tfi/experiment.hpp"
#include "tfi/scaling.hpp"
#include "tfi/spectrum.hpp"

using namespace tfi;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 7;

unsigned workers()
{
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(double v, int digits = 6)
{
    std::ostringstream s;
    s.precision(digits);
    s << v;
    return s.str();
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<int> sizes_64_to_4096()
{
    std::vector<int> sizes;
    for (int k = 12; k <= 24; ++k)
        sizes.push_back(static_cast<int>(std::lround(std::pow(2.0, k / 2.0))));
    return sizes;
}

Verdict oracle_equivalence()
{
    const auto start = std::chrono::steady_clock::now();
    const double gammas[] = {0.5, 1.0, 2.0};
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 50; ++k) {
        SampleStream u(kSeed, 1000 + k);
        const int n = 2 + std::min(8, static_cast<int>(u.next_unit() * 9));
        const double s = u.next_unit();
        const double gamma = gammas[k % 3];
        const DisorderSpec spec = k % 2 ? DisorderSpec::weak(0.5, s, gamma) : DisorderSpec::strong(1.0, s, gamma);
        const ChainSample c = sample_chain(spec, n, u);
        worst = std::max(worst, std::abs(energy_gap(build_bidiagonal(c)) - spin_oracle_gap(c)));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {worst < 1e-8 && secs < 60.0,
            "max |free-fermion gap - spin gap| = " + fmt(worst) + " over 50 samples (< 1e-8), " + fmt(secs, 3) + " s"};
}

Verdict construction_equivalence()
{
    double worst = 0.0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        SampleStream u(kSeed, 2000 + k);
        const int n = 2 + std::min(62, static_cast<int>(u.next_unit() * 63));
        const double s = u.next_unit();
        const DisorderSpec spec = k % 2 ? DisorderSpec::weak(0.5, s, 1.0) : DisorderSpec::strong(1.0, s, 1.0);
        const ChainSample c = sample_chain(spec, n, u);
        const Eigen::MatrixXd a = fermion_matrix_a(c);
        const Eigen::MatrixXd b = fermion_matrix_b(c);
        const Eigen::MatrixXd m1 = (a - b) * (a + b);
        const Eigen::MatrixXd m2 = factorized_m(c);
        const Eigen::VectorXd e1 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m1 + m1.transpose()),
                                                                                  Eigen::EigenvaluesOnly)
                                       .eigenvalues();
        const Eigen::VectorXd e2 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(0.5 * (m2 + m2.transpose()),
                                                                                  Eigen::EigenvaluesOnly)
                                       .eigenvalues();
        worst = std::max(worst, (e1 - e2).cwiseAbs().maxCoeff());
    }
    return {worst < 1e-10, "max eigenvalue difference = " + fmt(worst) + " over 20 samples, n <= 64 (< 1e-10)"};
}

Verdict closed_form_spectrum()
{
    double worst = 0.0;
    for (int n : {2, 5, 50, 500}) {
        const Eigen::VectorXd dense =
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(t_matrix(0.0, 1.0, 1.0, n), Eigen::EigenvaluesOnly)
                .eigenvalues();
        const std::vector<double> eps = t_spectrum_critical(n);
        for (int k = 0; k < n; ++k)
            worst = std::max(worst, std::abs(eps[static_cast<std::size_t>(n - 1 - k)] - dense(k)));
    }
    return {worst < 1e-11, "max |closed form - dense| = " + fmt(worst) + " for n in {2,5,50,500} (< 1e-11)"};
}

ExperimentConfig sandwich_config(unsigned w)
{
    ExperimentConfig c = parse_config("seed = 7\ndisorder = strong\nd = 1\ngamma = 1\n"
                                      "s_grid = 0, 0.5, 1\nsizes = 50, 500\nsamples = 1000\nbound_slack = 1e-10\n");
    finalize_config(c, ExperimentKind::bounds_check);
    c.workers = w;
    return c;
}

Verdict bound_sandwich(const fs::path& dir)
{
    std::ostringstream log;
    const auto start = std::chrono::steady_clock::now();
    const RunResult r = run_experiment(sandwich_config(1), dir / "w1", log);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const auto s = nlohmann::json::parse(slurp(dir / "w1" / "summary.json"));
    const std::size_t total = s["samples"], good = s["satisfied"];
    return {r.exit_code == kExitOk && good == total && total == 6000 && secs < 300.0,
            std::to_string(good) + "/" + std::to_string(total) + " samples satisfy lower <= gap <= upper (slack 1e-10), " +
                fmt(secs, 3) + " s"};
}

Verdict beta_identity()
{
    struct Case {
        double d;
        int m, n;
    };
    bool ok = true;
    std::string detail;
    for (const Case c : {Case{1, 1, 100}, Case{1, 2, 100}, Case{2, 1, 10}}) {
        const DisorderSpec spec = DisorderSpec::strong(c.d, 0.5, 1.0);
        const int samples = 100000;
        double sum = 0.0, sum2 = 0.0;
        for (int k = 0; k < samples; ++k) {
            const ChainSample chain = sample_chain(spec, c.n, SeedTag{ensemble_seed(kSeed, c.n), static_cast<std::uint64_t>(k)});
            const double v = std::pow(*std::min_element(chain.couplings.begin(), chain.couplings.end()), c.m);
            sum += v;
            sum2 += v * v;
        }
        const double mean = sum / samples;
        const double se = std::sqrt((sum2 / samples - mean * mean) / (samples - 1));
        const double exact = min_coupling_moment(spec, c.n, c.m);
        const double pulls = std::abs(mean - exact) / se;
        ok = ok && pulls < 3.0;
        detail += "(D=" + fmt(c.d) + ",m=" + std::to_string(c.m) + ",N=" + std::to_string(c.n) + ") " +
                  fmt(pulls, 3) + " se; ";
    }
    return {ok, "MC vs (N-1)B(mD+1,N-1): " + detail + "limit 3 se"};
}

Verdict weak_exponent()
{
    ScalingOptions opt;
    opt.workers = workers();
    const ScalingEstimate e =
        moment_curve(DisorderSpec::weak(0.5, 0.5, 1.0), sizes_64_to_4096(), 1000, 1, kSeed, opt);
    return {e.z_hat >= 0.95 && e.z_hat <= 1.05,
            "z_hat = " + fmt(e.z_hat) + " +- " + fmt(e.z_stderr, 3) + " (sizes 64..4096, 1000 samples; want [0.95, 1.05])"};
}

Verdict strong_exponents()
{
    ScalingOptions opt;
    opt.workers = workers();
    std::vector<double> grid;
    for (int k = 0; k <= 10; ++k)
        grid.push_back(k / 10.0);
    const auto rows =
        z_versus_s(DisorderSpec::strong(1.0, 0.5, 1.0), grid, sizes_64_to_4096(), 1000, 1, kSeed, opt, "full");
    bool symmetric = true;
    double worst_pull = 0.0;
    for (int k = 0; k < 5; ++k) {
        const ZRow& a = rows[static_cast<std::size_t>(k)];
        const ZRow& b = rows[static_cast<std::size_t>(10 - k)];
        const double joint = std::sqrt(a.z_stderr * a.z_stderr + b.z_stderr * b.z_stderr);
        const double pull = std::abs(a.z_hat - b.z_hat) / joint;
        worst_pull = std::max(worst_pull, pull);
        symmetric = symmetric && pull <= 2.0;
    }
    const double z0 = rows.front().z_hat;
    const double zh = rows[5].z_hat;
    const bool b_ok = z0 >= 1.4 && z0 <= 1.6;
    const bool c_ok = zh >= 0.95 && zh <= 2.0;
    std::string table;
    for (const auto& r : rows)
        table += fmt(r.s, 2) + ":" + fmt(r.z_hat, 4) + " ";
    return {symmetric && b_ok && c_ok,
            std::string("(a) max |z(s)-z(1-s)|/joint sigma = ") + fmt(worst_pull, 3) + (symmetric ? " ok" : " FAIL") +
                "; (b) z(0) = " + fmt(z0, 5) + (b_ok ? " ok" : " FAIL") + "; (c) z(0.5) = " + fmt(zh, 5) +
                (c_ok ? " ok" : " FAIL") + "; z(s): " + table};
}

Verdict correlation_exponents()
{
    const std::vector<double> offsets{0.05, 0.1, 0.2, 0.4};
    std::vector<double> xi[2], se[2];
    bool overlap = true;
    bool overlap_jk = true;
    std::string detail;
    for (double g : offsets) {
        const CorrelationProfile p = correlation_profile(DisorderSpec::strong(1.0, 0.5, 1.0 + g), 2000, 400, 20, kSeed,
                                                         ProfileOptions{workers()});
        FitResult f[2];
        try {
            f[0] = fit_correlation_length(p, CorrelationKind::average);
            f[1] = fit_correlation_length(p, CorrelationKind::typical);
        } catch (const FitDegradedError& e) {
            return {false, "fit degraded at Gamma-1 = " + fmt(g) + ": " + e.what()};
        }
        for (int k = 0; k < 2; ++k) {
            xi[k].push_back(f[k].xi);
            se[k].push_back(f[k].xi_stderr);
        }
        const double diff = std::abs(f[0].xi - f[1].xi);
        overlap = overlap && diff <= 2.0 * std::hypot(f[0].xi_stderr, f[1].xi_stderr);
        overlap_jk = overlap_jk && diff <= 2.0 * std::hypot(f[0].xi_jackknife_stderr, f[1].xi_jackknife_stderr);
        detail += "G-1=" + fmt(g, 2) + ": xi=" + fmt(f[0].xi, 4) + "+-" + fmt(f[0].xi_stderr, 2) + " (jk " +
                  fmt(f[0].xi_jackknife_stderr, 2) + "), xi_typ=" + fmt(f[1].xi, 4) + "+-" + fmt(f[1].xi_stderr, 2) +
                  " (jk " + fmt(f[1].xi_jackknife_stderr, 2) + "), x in [" + std::to_string(f[0].x_min) + "," +
                  std::to_string(f[0].x_max) + "]; ";
    }
    const PowerLawFit avg = fit_power_law(offsets, xi[0], se[0]);
    const PowerLawFit typ = fit_power_law(offsets, xi[1], se[1]);
    const bool slopes = avg.exponent >= -1.2 && avg.exponent <= -0.8 && typ.exponent >= -1.2 && typ.exponent <= -0.8;
    return {slopes && overlap,
            "slope(xi) = " + fmt(avg.exponent, 4) + " +- " + fmt(avg.exponent_stderr, 2) + ", slope(xi_typ) = " +
                fmt(typ.exponent, 4) + " +- " + fmt(typ.exponent_stderr, 2) + " (want [-1.2,-0.8]); overlap within 2 sigma: fit " +
                (overlap ? "yes" : "no") + ", jackknife " + (overlap_jk ? "yes" : "no") + "; " + detail};
}

Verdict determinism(const fs::path& dir)
{
    std::ostringstream log;
    if (!fs::exists(dir / "w1" / "bounds.csv"))
        run_experiment(sandwich_config(1), dir / "w1", log);
    run_experiment(sandwich_config(8), dir / "w8", log);
    const std::string a = slurp(dir / "w1" / "bounds.csv");
    const std::string b = slurp(dir / "w8" / "bounds.csv");
    return {!a.empty() && a == b, "bounds.csv with 1 and 8 workers: " + std::to_string(a.size()) + " vs " +
                                      std::to_string(b.size()) + " bytes, sha256 " + sha256_hex(a).substr(0, 16) +
                                      " vs " + sha256_hex(b).substr(0, 16)};
}

} // namespace

int main(int argc, char** argv)
{
    // Optional argument: run only the listed criteria, e.g. "1,2,9".
    std::vector<bool> selected(10, argc < 2);
    if (argc >= 2) {
        std::istringstream in(argv[1]);
        for (std::string item; std::getline(in, item, ',');)
            if (int k = std::atoi(item.c_str()); k >= 1 && k <= 9)
                selected[static_cast<std::size_t>(k)] = true;
    }

    const fs::path dir = fs::temp_directory_path() / "tfi_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"oracle equivalence", oracle_equivalence},
        {"construction equivalence", construction_equivalence},
        {"closed-form spectrum", closed_form_spectrum},
        {"bound sandwich", [&] { return bound_sandwich(dir); }},
        {"beta-function identity", beta_identity},
        {"weak-disorder exponent", weak_exponent},
        {"strong-disorder exponents", strong_exponents},
        {"correlation exponents", correlation_exponents},
        {"determinism", [&] { return determinism(dir); }},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (!selected[i + 1])
            continue;
        const auto start = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failures += v.pass ? 0 : 1;
        std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << v.detail << " [" << fmt(secs, 3) << " s]" << std::endl;
    }
    fs::remove_all(dir);
    return failures == 0 ? 0 : 1;
}
