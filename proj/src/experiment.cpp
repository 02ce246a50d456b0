#include "tfi/experiment.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include <Eigen/Core>
#include <json.hpp>
#include <openssl/evp.h>

#include "tfi/bounds.hpp"
#include "tfi/correlation.hpp"
#include "tfi/format.hpp"
#include "tfi/parallel.hpp"
#include "tfi/scaling.hpp"
#include "tfi/spectrum.hpp"

#ifndef TFI_VERSION
#define TFI_VERSION "unknown"
#endif

namespace tfi {

using Json = nlohmann::ordered_json;

namespace {

constexpr std::uint64_t kOracleSalt = 0x6f7261636c65ULL;

class Csv {
public:
    explicit Csv(std::initializer_list<std::string> header) { row(std::vector<std::string>(header)); }

    void row(const std::vector<std::string>& cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i)
                text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    const std::string& text() const { return text_; }

private:
    std::string text_;
};

std::string num(double v) { return format_real(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::size_t v) { return std::to_string(v); }

// JSON has no inf/NaN; those become null.
Json real(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json spec_json(const DisorderSpec& spec)
{
    Json j;
    j["disorder"] = spec.is_strong() ? "strong" : "weak";
    if (spec.is_strong())
        j["d"] = spec.d();
    else
        j["j0"] = spec.j0();
    j["s"] = spec.s;
    j["gamma"] = spec.gamma;
    return j;
}

Json window_json(const WindowFit& w)
{
    Json j;
    j["label"] = w.window.label;
    j["n_min"] = real(w.window.n_min);
    j["n_max"] = real(w.window.n_max);
    j["points"] = w.points;
    j["valid"] = w.valid;
    if (w.valid) {
        j["z_hat"] = w.z_hat;
        j["z_stderr"] = w.z_stderr;
        j["slope"] = w.slope;
        j["intercept"] = w.intercept;
        j["chi2"] = w.chi2;
    }
    return j;
}

Json estimate_json(const ScalingEstimate& e)
{
    Json j;
    j["m"] = e.m;
    j["sizes"] = e.sizes;
    Json ln = Json::array();
    for (std::size_t i = 0; i < e.sizes.size(); ++i)
        ln.push_back({{"n", e.sizes[i]}, {"ln_moment", e.ln_moments[i]}, {"ln_stderr", e.ln_stderr[i]}});
    j["ln_moments"] = ln;
    j["z_hat"] = e.z_hat;
    j["z_stderr"] = e.z_stderr;
    Json windows = Json::array();
    windows.push_back(window_json(e.full));
    for (const auto& w : e.windows)
        windows.push_back(window_json(w));
    j["fits"] = windows;
    return j;
}

Json fit_json(const FitResult& f)
{
    Json j;
    j["model"] = "ln C = a - x/xi - eta ln x";
    j["kind"] = to_string(f.kind);
    j["params"] = {{"a", f.log_amplitude}, {"inv_xi", f.inv_xi}, {"eta", f.eta}};
    j["stderr"] = {{"a", f.log_amplitude_stderr}, {"inv_xi", f.inv_xi_stderr}, {"eta", f.eta_stderr}};
    j["jackknife_stderr"] = {{"inv_xi", real(f.inv_xi_jackknife_stderr)},
                             {"eta", real(f.eta_jackknife_stderr)},
                             {"xi", real(f.xi_jackknife_stderr)}};
    j["xi"] = real(f.xi);
    j["xi_stderr"] = real(f.xi_stderr);
    j["window"] = {f.x_min, f.x_max};
    j["points"] = f.points;
    j["residual_norm"] = f.residual_norm;
    Json cov = Json::array();
    for (int r = 0; r < 3; ++r)
        cov.push_back({f.covariance(r, 0), f.covariance(r, 1), f.covariance(r, 2)});
    j["covariance"] = cov;
    return j;
}

Json bounds_json(const ZBounds& b) { return {{"lower", real(b.lower)}, {"upper", real(b.upper)}}; }

ScalingOptions scaling_options(const ExperimentConfig& c)
{
    ScalingOptions o;
    o.workers = c.workers;
    o.windows = c.windows;
    return o;
}

struct Outputs {
    std::filesystem::path dir;
    std::vector<std::string> names;

    void write(const std::string& name, const std::string& text)
    {
        write_text_file(dir / name, text);
        names.push_back(name);
    }
};

// Analytic per-size moment bounds written by --emit-bounds.
Csv moment_bounds_csv(const ExperimentConfig& c, const ScalingEstimate& est, bool& all_inside)
{
    Csv csv({"n", "ln_moment", "ln_lower", "ln_upper", "inside"});
    const DisorderSpec spec = c.spec();
    for (std::size_t i = 0; i < est.sizes.size(); ++i) {
        const int n = est.sizes[i];
        const double lower = spec.is_strong() ? strong_moment_lower_bound(spec.d(), n, c.m)
                                              : weak_moment_lower_bound(spec.j0(), n, c.m);
        const double ln_lower = std::log(lower);
        const double ln_upper = std::log(moment_upper_bound(n, c.m));
        const double slack = c.bound_slack;
        const bool inside = est.ln_moments[i] >= ln_lower - slack && est.ln_moments[i] <= ln_upper + slack;
        all_inside = all_inside && inside;
        csv.row({num(n), num(est.ln_moments[i]), num(ln_lower), num(ln_upper), inside ? "1" : "0"});
    }
    return csv;
}

int run_gap_scaling(const ExperimentConfig& c, Outputs& out, Json& summary, std::ostream& log)
{
    const DisorderSpec spec = c.spec();
    log << "gap-scaling: " << c.sizes.size() << " sizes, " << c.samples << " samples each\n";
    const ScalingEstimate est = moment_curve(spec, c.sizes, c.samples, c.m, *c.seed, scaling_options(c));

    Csv csv({"n", "mean_gap", "stderr", "samples"});
    for (std::size_t i = 0; i < est.sizes.size(); ++i)
        csv.row({num(est.sizes[i]), num(est.mean_gap[i]), num(est.mean_gap_stderr[i]), num(est.samples[i])});
    out.write("gap_vs_n.csv", csv.text());

    summary["spec"] = spec_json(spec);
    summary["estimate"] = estimate_json(est);
    summary["z_bounds"] = bounds_json(z_bounds(spec));
    int code = kExitOk;
    if (c.emit_bounds) {
        bool inside = true;
        out.write("bounds.csv", moment_bounds_csv(c, est, inside).text());
        summary["moment_bounds_satisfied"] = inside;
        if (!inside)
            code = kExitCheckFailed;
    }
    log << "gap-scaling: z_hat = " << format_real(est.z_hat) << " +- " << format_real(est.z_stderr) << "\n";
    return code;
}

int run_z_vs_s(const ExperimentConfig& c, Outputs& out, Json& summary, std::ostream& log)
{
    const DisorderSpec base = c.spec();
    log << "z-vs-s: " << c.s_grid.size() << " values of s\n";
    const auto rows =
        z_versus_s(base, c.s_grid, c.sizes, c.samples, c.m, *c.seed, scaling_options(c), c.z_window);

    Csv table({"s", "z_hat", "z_stderr", "z_lower", "z_upper"});
    Csv gaps({"s", "n", "mean_gap", "stderr", "samples"});
    Json json_rows = Json::array();
    for (const auto& r : rows) {
        table.row({num(r.s), num(r.z_hat), num(r.z_stderr), num(r.bounds.lower), num(r.bounds.upper)});
        const auto& e = r.estimate;
        for (std::size_t i = 0; i < e.sizes.size(); ++i)
            gaps.row({num(r.s), num(e.sizes[i]), num(e.mean_gap[i]), num(e.mean_gap_stderr[i]), num(e.samples[i])});
        const bool consistent = r.z_hat + 2.0 * r.z_stderr >= r.bounds.lower - 0.1 &&
                                r.z_hat - 2.0 * r.z_stderr <= r.bounds.upper + 0.1;
        json_rows.push_back({{"s", r.s},
                             {"z_hat", r.z_hat},
                             {"z_stderr", r.z_stderr},
                             {"bounds", bounds_json(r.bounds)},
                             {"bounds_consistent", consistent},
                             {"estimate", estimate_json(e)}});
        log << "z-vs-s: s = " << format_real(r.s) << " z_hat = " << format_real(r.z_hat) << "\n";
    }
    out.write("z_vs_s.csv", table.text());
    out.write("gap_vs_n_by_s.csv", gaps.text());
    if (c.emit_bounds) {
        Csv b({"s", "z_lower", "z_upper"});
        for (const auto& r : rows)
            b.row({num(r.s), num(r.bounds.lower), num(r.bounds.upper)});
        out.write("bounds.csv", b.text());
    }
    summary["spec"] = spec_json(base);
    summary["z_window"] = c.z_window;
    summary["rows"] = json_rows;
    return kExitOk;
}

int run_correlation(const ExperimentConfig& c, Outputs& out, Json& summary, std::ostream& log)
{
    FitOptions fit;
    fit.x_min = c.fit_x_min;
    fit.x_max = c.fit_x_max;
    fit.signal_to_noise = c.fit_snr;
    fit.noise_floor = c.fit_noise_floor;
    fit.max_nonpositive_fraction = c.max_nonpositive_fraction;

    const bool single = c.gamma_offsets.size() == 1;
    Json fits = Json::array();
    std::vector<double> offsets;
    std::vector<double> xi[2], xi_se[2];
    for (std::size_t k = 0; k < c.gamma_offsets.size(); ++k) {
        const double offset = c.gamma_offsets[k];
        const DisorderSpec spec = c.spec().with_gamma(1.0 + offset);
        log << "correlation: gamma = " << format_real(spec.gamma) << "\n";
        const CorrelationProfile p =
            correlation_profile(spec, c.n, c.x_max, c.realizations, *c.seed, ProfileOptions{c.workers});

        Csv csv({"x", "c_ave", "c_ave_stderr", "ln_c_typ", "ln_c_typ_stderr", "n_excluded"});
        for (std::size_t i = 0; i < p.distances.size(); ++i)
            csv.row({num(p.distances[i]), num(p.c_ave[i]), num(p.c_ave_stderr[i]), num(p.ln_c_typ[i]),
                     num(p.ln_c_typ_stderr[i]), num(p.n_excluded[i])});
        const std::string name = single ? "corr_profile.csv" : "corr_profile_" + std::to_string(k) + ".csv";
        out.write(name, csv.text());

        Json entry;
        entry["gamma"] = spec.gamma;
        entry["gamma_minus_gamma_c"] = offset;
        entry["profile"] = name;
        int excluded = 0;
        for (int e : p.n_excluded)
            excluded += e;
        entry["excluded_values"] = excluded;
        bool both = true;
        double got[2] = {0.0, 0.0}, got_se[2] = {0.0, 0.0};
        for (int kind = 0; kind < 2; ++kind) {
            const auto which = kind == 0 ? CorrelationKind::average : CorrelationKind::typical;
            try {
                const FitResult f = fit_correlation_length(p, which, fit);
                entry[to_string(which)] = fit_json(f);
                got[kind] = f.xi;
                got_se[kind] = f.xi_stderr;
                both = both && std::isfinite(f.xi);
            } catch (const FitDegradedError& e) {
                entry[to_string(which)] = {{"error", e.what()}};
                log << "correlation: " << to_string(which) << " fit degraded: " << e.what() << "\n";
                both = false;
            }
        }
        if (both && offset > 0.0) {
            offsets.push_back(offset);
            for (int kind = 0; kind < 2; ++kind) {
                xi[kind].push_back(got[kind]);
                xi_se[kind].push_back(got_se[kind]);
            }
        }
        fits.push_back(entry);
    }

    Json fit_doc;
    fit_doc["spec"] = spec_json(c.spec());
    fit_doc["n"] = c.n;
    fit_doc["realizations"] = c.realizations;
    fit_doc["fits"] = fits;
    if (offsets.size() >= 2) {
        for (int kind = 0; kind < 2; ++kind) {
            const PowerLawFit pl = fit_power_law(offsets, xi[kind], xi_se[kind]);
            fit_doc["nu"][kind == 0 ? "average" : "typical"] = {
                {"slope", pl.exponent}, {"slope_stderr", pl.exponent_stderr}, {"nu", -pl.exponent}};
        }
    }
    out.write("corr_fit.json", fit_doc.dump(2) + "\n");
    summary["fits"] = fit_doc;
    return kExitOk;
}

int run_bounds_check(const ExperimentConfig& c, Outputs& out, Json& summary, std::ostream& log)
{
    Csv csv({"s", "n", "sample", "gap", "lower", "upper_psi", "upper_psi_prime", "ok"});
    std::size_t total = 0, satisfied = 0;
    Json groups = Json::array();
    for (double s : c.s_grid) {
        const DisorderSpec spec = c.spec().with_s(s);
        for (int n : c.sizes) {
            struct Row {
                double gap, lower, upper_psi, upper_psi_prime;
                bool ok;
            };
            std::vector<Row> rows(static_cast<std::size_t>(c.samples));
            const std::uint64_t base = ensemble_seed(*c.seed, n);
            parallel_for(rows.size(), c.workers, [&](std::size_t i) {
                const ChainSample chain = sample_chain(spec, n, SeedTag{base, i});
                const double gap = energy_gap(build_bidiagonal(chain));
                const BoundReport b = variational_upper_bound(chain);
                const double upper = b.upper();
                const bool ok = b.lower <= gap * (1.0 + c.bound_slack) && gap <= upper * (1.0 + c.bound_slack);
                rows[i] = Row{gap, b.lower, b.upper_psi, b.upper_psi_prime, ok};
            });
            std::size_t good = 0;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                const Row& r = rows[i];
                good += r.ok ? 1 : 0;
                csv.row({num(s), num(n), num(i), num(r.gap), num(r.lower), num(r.upper_psi), num(r.upper_psi_prime),
                         r.ok ? "1" : "0"});
            }
            total += rows.size();
            satisfied += good;
            groups.push_back({{"s", s}, {"n", n}, {"samples", rows.size()}, {"satisfied", good}});
            log << "bounds-check: s = " << format_real(s) << " n = " << n << " satisfied " << good << "/"
                << rows.size() << "\n";
        }
    }
    out.write("bounds.csv", csv.text());
    summary["spec"] = spec_json(c.spec());
    summary["relative_slack"] = c.bound_slack;
    summary["groups"] = groups;
    summary["samples"] = total;
    summary["satisfied"] = satisfied;
    summary["fraction_satisfied"] = total ? static_cast<double>(satisfied) / static_cast<double>(total) : 1.0;
    return satisfied == total ? kExitOk : kExitCheckFailed;
}

int run_oracle_check(const ExperimentConfig& c, Outputs& out, Json& summary, std::ostream& log)
{
    struct Row {
        bool strong;
        int n;
        double s, gamma, fermion, spin, gap_diff, corr_diff;
    };
    std::vector<Row> rows(static_cast<std::size_t>(c.oracle_samples));
    const std::uint64_t base = splitmix64_mix(*c.seed ^ kOracleSalt);
    parallel_for(rows.size(), c.workers, [&](std::size_t i) {
        SampleStream stream(base, i);
        const bool strong = i % 2 == 0;
        const int span = c.oracle_max_n - c.oracle_min_n + 1;
        const int n = c.oracle_min_n + std::min(span - 1, static_cast<int>(stream.next_unit() * span));
        const double s = stream.next_unit();
        const auto g = std::min(c.oracle_gammas.size() - 1,
                                static_cast<std::size_t>(stream.next_unit() * c.oracle_gammas.size()));
        const double gamma = c.oracle_gammas[g];
        const DisorderSpec spec = strong ? DisorderSpec::strong(c.d, s, gamma) : DisorderSpec::weak(c.j0, s, gamma);
        const ChainSample chain = sample_chain(spec, n, stream);

        const BidiagonalOperator op = build_bidiagonal(chain);
        const SpinOracle oracle(chain);
        const double fermion = energy_gap(op);
        const double spin = oracle.gap();
        const FermionModes modes = full_modes(op);
        double corr = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                corr = std::max(corr, std::abs(correlation_value(modes, a, b) - oracle.zz_correlation(a, b)));
        rows[i] = Row{strong, n, s, gamma, fermion, spin, std::abs(fermion - spin), corr};
    });

    Csv csv({"sample", "disorder", "n", "s", "gamma", "fermion_gap", "spin_gap", "abs_diff", "max_corr_diff"});
    double worst_gap = 0.0, worst_corr = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& r = rows[i];
        worst_gap = std::max(worst_gap, r.gap_diff);
        worst_corr = std::max(worst_corr, r.corr_diff);
        csv.row({num(i), r.strong ? "strong" : "weak", num(r.n), num(r.s), num(r.gamma), num(r.fermion), num(r.spin),
                 num(r.gap_diff), num(r.corr_diff)});
    }
    out.write("oracle.csv", csv.text());
    const bool pass = worst_gap < c.oracle_tolerance && worst_corr < c.oracle_tolerance;
    summary["samples"] = rows.size();
    summary["tolerance"] = c.oracle_tolerance;
    summary["max_gap_diff"] = worst_gap;
    summary["max_corr_diff"] = worst_corr;
    summary["pass"] = pass;
    log << "oracle-check: max |gap diff| = " << format_real(worst_gap)
        << ", max |corr diff| = " << format_real(worst_corr) << "\n";
    return pass ? kExitOk : kExitCheckFailed;
}

std::string eigen_version()
{
    return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
           std::to_string(EIGEN_MINOR_VERSION);
}

} // namespace

std::string sha256_hex(const std::string& bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("SHA-256 digest failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 15];
    }
    return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    f.write(text.data(), static_cast<std::streamsize>(text.size()));
    f.close();
    if (!f)
        throw std::runtime_error("write failed: " + path.string());
}

RunResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir, std::ostream& log)
{
    if (!config.experiment || !config.seed)
        throw ConfigError("<config>", 0, config.seed ? "experiment" : "seed", "config was not finalized");
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());

    const auto start = std::chrono::steady_clock::now();
    Outputs out{out_dir, {}};
    Json summary;
    summary["experiment"] = to_string(*config.experiment);
    summary["seed"] = *config.seed;
    summary["workers"] = config.workers;
    summary["fast"] = config.fast;

    int code = kExitOk;
    switch (*config.experiment) {
    case ExperimentKind::gap_scaling: code = run_gap_scaling(config, out, summary, log); break;
    case ExperimentKind::z_vs_s: code = run_z_vs_s(config, out, summary, log); break;
    case ExperimentKind::correlation: code = run_correlation(config, out, summary, log); break;
    case ExperimentKind::bounds_check: code = run_bounds_check(config, out, summary, log); break;
    case ExperimentKind::oracle_check: code = run_oracle_check(config, out, summary, log); break;
    }

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    summary["wall_time_s"] = wall;
    summary["exit_code"] = code;
    out.write("summary.json", summary.dump(2) + "\n");

    const std::string canonical = canonical_config(config);
    out.write("config.resolved", canonical);

    std::ostringstream manifest;
    manifest << "config_sha256 " << sha256_hex(canonical) << "\n";
    manifest << "library tfi " << TFI_VERSION << "\n";
    manifest << "library eigen " << eigen_version() << "\n";
    for (const auto& name : out.names) {
        std::ifstream f(out_dir / name, std::ios::binary);
        std::ostringstream bytes;
        bytes << f.rdbuf();
        manifest << sha256_hex(bytes.str()) << "  " << name << "\n";
    }
    write_text_file(out_dir / "MANIFEST", manifest.str());

    RunResult result;
    result.exit_code = code;
    result.artifacts = out.names;
    result.artifacts.push_back("MANIFEST");
    result.message = code == kExitOk ? "ok" : "check failed";
    return result;
}

} // namespace tfi
