#include "tfi/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "tfi/format.hpp"

namespace tfi {

namespace {

std::string trim(const std::string& s)
{
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos)
        return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        parts.push_back(trim(item));
    return parts;
}

double to_real(const std::string& text)
{
    if (text == "inf")
        return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size() || !std::isfinite(v))
        throw std::invalid_argument("expected a real number, got '" + text + "'");
    return v;
}

long long to_integer(const std::string& text)
{
    long long v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw std::invalid_argument("expected an integer, got '" + text + "'");
    return v;
}

int to_int(const std::string& text, int lo)
{
    const long long v = to_integer(text);
    if (v < lo || v > std::numeric_limits<int>::max())
        throw std::invalid_argument("must be an integer >= " + std::to_string(lo) + ", got '" + text + "'");
    return static_cast<int>(v);
}

std::uint64_t to_u64(const std::string& text)
{
    std::uint64_t v = 0;
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size())
        throw std::invalid_argument("expected an unsigned 64-bit integer, got '" + text + "'");
    return v;
}

bool to_bool(const std::string& text)
{
    if (text == "true" || text == "1")
        return true;
    if (text == "false" || text == "0")
        return false;
    throw std::invalid_argument("expected true or false, got '" + text + "'");
}

std::vector<double> to_reals(const std::string& text)
{
    std::vector<double> out;
    for (const auto& part : split(text, ','))
        out.push_back(to_real(part));
    if (out.empty())
        throw std::invalid_argument("empty list");
    return out;
}

std::vector<int> to_ints(const std::string& text, int lo)
{
    std::vector<int> out;
    for (const auto& part : split(text, ','))
        out.push_back(to_int(part, lo));
    if (out.empty())
        throw std::invalid_argument("empty list");
    return out;
}

template <class T, class F>
std::string join(const std::vector<T>& values, F&& fmt)
{
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out += ',';
        out += fmt(values[i]);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters()
{
    static const std::map<std::string, Setter> table = {
        {"experiment",
         [](ExperimentConfig& c, const std::string& v) {
             c.experiment = parse_experiment_kind(v);
             if (!c.experiment)
                 throw std::invalid_argument("unknown experiment '" + v + "'");
         }},
        {"disorder",
         [](ExperimentConfig& c, const std::string& v) {
             if (v != "strong" && v != "weak")
                 throw std::invalid_argument("expected strong or weak, got '" + v + "'");
             c.disorder = v;
         }},
        {"d", [](ExperimentConfig& c, const std::string& v) { c.d = to_real(v); }},
        {"j0", [](ExperimentConfig& c, const std::string& v) { c.j0 = to_real(v); }},
        {"s", [](ExperimentConfig& c, const std::string& v) { c.s = to_real(v); }},
        {"gamma", [](ExperimentConfig& c, const std::string& v) { c.gamma = to_real(v); }},
        {"sizes", [](ExperimentConfig& c, const std::string& v) { c.sizes = to_ints(v, 2); }},
        {"samples", [](ExperimentConfig& c, const std::string& v) { c.samples = to_int(v, 2); }},
        {"m", [](ExperimentConfig& c, const std::string& v) { c.m = to_int(v, 1); }},
        {"s_grid", [](ExperimentConfig& c, const std::string& v) { c.s_grid = to_reals(v); }},
        {"window",
         [](ExperimentConfig& c, const std::string& v) {
             std::istringstream in(v);
             std::string label, lo, hi, extra;
             if (!(in >> label >> lo >> hi) || (in >> extra))
                 throw std::invalid_argument("expected 'label n_min n_max', got '" + v + "'");
             SizeWindow w{label, to_real(lo), to_real(hi)};
             if (!(w.n_min <= w.n_max))
                 throw std::invalid_argument("window n_min exceeds n_max");
             c.windows.push_back(w);
         }},
        {"z_window", [](ExperimentConfig& c, const std::string& v) { c.z_window = v; }},
        {"n", [](ExperimentConfig& c, const std::string& v) { c.n = to_int(v, 2); }},
        {"realizations", [](ExperimentConfig& c, const std::string& v) { c.realizations = to_int(v, 1); }},
        {"x_max", [](ExperimentConfig& c, const std::string& v) { c.x_max = to_int(v, 0); }},
        {"gamma_offsets", [](ExperimentConfig& c, const std::string& v) { c.gamma_offsets = to_reals(v); }},
        {"fit_x_min", [](ExperimentConfig& c, const std::string& v) { c.fit_x_min = to_int(v, 1); }},
        {"fit_x_max", [](ExperimentConfig& c, const std::string& v) { c.fit_x_max = to_int(v, 1); }},
        {"fit_snr", [](ExperimentConfig& c, const std::string& v) { c.fit_snr = to_real(v); }},
        {"fit_noise_floor", [](ExperimentConfig& c, const std::string& v) { c.fit_noise_floor = to_real(v); }},
        {"max_nonpositive_fraction",
         [](ExperimentConfig& c, const std::string& v) { c.max_nonpositive_fraction = to_real(v); }},
        {"bound_slack", [](ExperimentConfig& c, const std::string& v) { c.bound_slack = to_real(v); }},
        {"oracle_samples", [](ExperimentConfig& c, const std::string& v) { c.oracle_samples = to_int(v, 1); }},
        {"oracle_gammas", [](ExperimentConfig& c, const std::string& v) { c.oracle_gammas = to_reals(v); }},
        {"oracle_min_n", [](ExperimentConfig& c, const std::string& v) { c.oracle_min_n = to_int(v, 2); }},
        {"oracle_max_n", [](ExperimentConfig& c, const std::string& v) { c.oracle_max_n = to_int(v, 2); }},
        {"oracle_tolerance", [](ExperimentConfig& c, const std::string& v) { c.oracle_tolerance = to_real(v); }},
        {"seed", [](ExperimentConfig& c, const std::string& v) { c.seed = to_u64(v); }},
        {"workers", [](ExperimentConfig& c, const std::string& v) { c.workers = static_cast<unsigned>(to_int(v, 1)); }},
        {"out", [](ExperimentConfig& c, const std::string& v) { c.out = v; }},
        {"fast", [](ExperimentConfig& c, const std::string& v) { c.fast = to_bool(v); }},
        {"emit_bounds", [](ExperimentConfig& c, const std::string& v) { c.emit_bounds = to_bool(v); }},
    };
    return table;
}

} // namespace

std::string to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::gap_scaling: return "gap-scaling";
    case ExperimentKind::z_vs_s: return "z-vs-s";
    case ExperimentKind::correlation: return "correlation";
    case ExperimentKind::bounds_check: return "bounds-check";
    case ExperimentKind::oracle_check: return "oracle-check";
    }
    return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(const std::string& name)
{
    for (auto k : {ExperimentKind::gap_scaling, ExperimentKind::z_vs_s, ExperimentKind::correlation,
                   ExperimentKind::bounds_check, ExperimentKind::oracle_check})
        if (to_string(k) == name)
            return k;
    return std::nullopt;
}

static std::string config_message(const std::string& origin, int line, const std::string& field,
                                  const std::string& message)
{
    std::string where = origin;
    if (line > 0)
        where += ":" + std::to_string(line);
    if (!field.empty())
        where += ": field '" + field + "'";
    return where + ": " + message;
}

ConfigError::ConfigError(const std::string& o, int l, const std::string& f, const std::string& message)
    : std::runtime_error(config_message(o, l, f, message)), origin(o), line(l), field(f)
{
}

DisorderSpec ExperimentConfig::spec() const
{
    return disorder == "weak" ? DisorderSpec::weak(j0, s, gamma) : DisorderSpec::strong(d, s, gamma);
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin)
{
    ExperimentConfig config;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (body.empty())
            continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin, line, "", "expected 'key = value'");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end())
            throw ConfigError(origin, line, key, "unknown key");
        if (key != "window" && !seen.insert(key).second)
            throw ConfigError(origin, line, key, "duplicate key");
        if (value.empty())
            throw ConfigError(origin, line, key, "missing value");
        try {
            it->second(config, value);
        } catch (const std::invalid_argument& e) {
            throw ConfigError(origin, line, key, e.what());
        }
    }
    return config;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(path, 0, "", "cannot open config file");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path);
}

void finalize_config(ExperimentConfig& c, ExperimentKind kind, const std::string& origin)
{
    auto fail = [&](const std::string& field, const std::string& message) {
        throw ConfigError(origin, 0, field, message);
    };
    if (c.experiment && *c.experiment != kind)
        fail("experiment", "config is for '" + to_string(*c.experiment) + "' but the subcommand is '" +
                               to_string(kind) + "'");
    c.experiment = kind;
    if (!c.seed)
        fail("seed", "missing required field (or pass --seed)");
    try {
        c.spec().validate();
    } catch (const ValidationError& e) {
        fail(c.disorder == "weak" ? "j0" : "d", e.what());
    }

    switch (kind) {
    case ExperimentKind::gap_scaling:
    case ExperimentKind::z_vs_s:
        if (c.sizes.size() < 3)
            fail("sizes", "need at least 3 sizes");
        if (c.gamma != 1.0)
            fail("gamma", "exponent runs must sit at the critical field gamma = 1");
        if (kind == ExperimentKind::z_vs_s) {
            if (c.s_grid.empty())
                for (int k = 0; k <= 10; ++k)
                    c.s_grid.push_back(k / 10.0);
            for (double s : c.s_grid)
                if (!(s >= 0.0 && s <= 1.0))
                    fail("s_grid", "values must lie in [0, 1]");
        }
        if (c.fast)
            c.samples = std::min(c.samples, 200);
        break;
    case ExperimentKind::correlation:
        if (c.x_max == 0)
            c.x_max = c.n / 2 - 1;
        if (c.x_max < 1 || c.x_max > c.n / 2 - 1)
            fail("x_max", "must lie in [1, n/2 - 1]");
        if (c.gamma_offsets.empty())
            c.gamma_offsets = {c.gamma - 1.0};
        for (double g : c.gamma_offsets)
            if (!(1.0 + g > 0.0))
                fail("gamma_offsets", "1 + offset must be positive");
        break;
    case ExperimentKind::bounds_check:
        if (c.sizes.empty())
            fail("sizes", "need at least one size");
        if (c.s_grid.empty())
            c.s_grid = {c.s};
        if (c.fast)
            c.samples = std::min(c.samples, 200);
        break;
    case ExperimentKind::oracle_check:
        if (c.oracle_min_n > c.oracle_max_n)
            fail("oracle_max_n", "must be at least oracle_min_n");
        if (c.oracle_max_n > 12)
            fail("oracle_max_n", "dense spin oracle supports at most 12 sites");
        break;
    }
}

std::string canonical_config(const ExperimentConfig& c)
{
    std::ostringstream out;
    auto line = [&](const std::string& key, const std::string& value) { out << key << " = " << value << '\n'; };
    auto ints = [](const std::vector<int>& v) { return join(v, [](int x) { return std::to_string(x); }); };
    auto reals = [](const std::vector<double>& v) { return join(v, format_real); };
    line("experiment", c.experiment ? to_string(*c.experiment) : "");
    line("disorder", c.disorder);
    line("d", format_real(c.d));
    line("j0", format_real(c.j0));
    line("s", format_real(c.s));
    line("gamma", format_real(c.gamma));
    line("sizes", ints(c.sizes));
    line("samples", std::to_string(c.samples));
    line("m", std::to_string(c.m));
    line("s_grid", reals(c.s_grid));
    for (const auto& w : c.windows)
        line("window", w.label + " " + format_real(w.n_min) + " " + format_real(w.n_max));
    line("z_window", c.z_window);
    line("n", std::to_string(c.n));
    line("realizations", std::to_string(c.realizations));
    line("x_max", std::to_string(c.x_max));
    line("gamma_offsets", reals(c.gamma_offsets));
    line("fit_x_min", std::to_string(c.fit_x_min));
    line("fit_x_max", c.fit_x_max ? std::to_string(*c.fit_x_max) : "");
    line("fit_snr", format_real(c.fit_snr));
    line("fit_noise_floor", format_real(c.fit_noise_floor));
    line("max_nonpositive_fraction", format_real(c.max_nonpositive_fraction));
    line("bound_slack", format_real(c.bound_slack));
    line("oracle_samples", std::to_string(c.oracle_samples));
    line("oracle_gammas", reals(c.oracle_gammas));
    line("oracle_min_n", std::to_string(c.oracle_min_n));
    line("oracle_max_n", std::to_string(c.oracle_max_n));
    line("oracle_tolerance", format_real(c.oracle_tolerance));
    line("seed", c.seed ? std::to_string(*c.seed) : "");
    line("fast", c.fast ? "true" : "false");
    line("emit_bounds", c.emit_bounds ? "true" : "false");
    return out.str();
}

} // namespace tfi
