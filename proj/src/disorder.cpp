#include "tfi/disorder.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

namespace tfi {

namespace {

std::string num(double v)
{
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

} // namespace

DisorderSpec DisorderSpec::weak(double j0, double s, double gamma)
{
    DisorderSpec spec{WeakDisorder{j0}, s, gamma};
    spec.validate();
    return spec;
}

DisorderSpec DisorderSpec::strong(double d, double s, double gamma)
{
    DisorderSpec spec{StrongDisorder{d}, s, gamma};
    spec.validate();
    return spec;
}

double DisorderSpec::j0() const
{
    if (const auto* w = std::get_if<WeakDisorder>(&kind))
        return w->j0;
    throw UnsupportedError("J0 is defined only for weak disorder");
}

double DisorderSpec::d() const
{
    if (const auto* st = std::get_if<StrongDisorder>(&kind))
        return st->d;
    throw UnsupportedError("D is defined only for strong disorder");
}

void DisorderSpec::validate() const
{
    if (const auto* w = std::get_if<WeakDisorder>(&kind)) {
        if (!(w->j0 > 0.0 && w->j0 < 1.0))
            throw ValidationError("J0 must lie in (0,1), got " + num(w->j0));
    } else {
        const double dd = std::get<StrongDisorder>(kind).d;
        if (!(dd > 0.0) || !std::isfinite(dd))
            throw ValidationError("D must be positive and finite, got " + num(dd));
    }
    if (!(s >= 0.0 && s <= 1.0))
        throw ValidationError("s must lie in [0,1], got " + num(s));
    if (!(gamma > 0.0) || !std::isfinite(gamma))
        throw ValidationError("gamma must be positive and finite, got " + num(gamma));
}

DisorderSpec DisorderSpec::with_s(double new_s) const
{
    DisorderSpec out = *this;
    out.s = new_s;
    out.validate();
    return out;
}

DisorderSpec DisorderSpec::with_gamma(double new_gamma) const
{
    DisorderSpec out = *this;
    out.gamma = new_gamma;
    out.validate();
    return out;
}

ChainSample ChainSample::mirrored() const
{
    ChainSample out = *this;
    std::reverse(out.couplings.begin(), out.couplings.end());
    std::reverse(out.fields.begin(), out.fields.end());
    out.s = 1.0 - s;
    return out;
}

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

SampleStream::SampleStream(std::uint64_t master_seed, std::uint64_t index)
{
    std::uint64_t k = splitmix64_mix(splitmix64_mix(master_seed) ^ index);
    for (auto& word : state_) {
        k += 0x9e3779b97f4a7c15ULL;
        word = splitmix64_mix(k);
    }
}

std::uint64_t SampleStream::next_u64() noexcept
{
    const std::uint64_t result = std::rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = std::rotl(state_[3], 45);
    return result;
}

double SampleStream::next_unit() noexcept
{
    // (k + 1) / 2^53 for k in [0, 2^53): lands on (0,1].
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

ReplayStream::ReplayStream(std::vector<double> values) : values_(std::move(values)) {}

double ReplayStream::next_unit()
{
    if (pos_ >= values_.size())
        throw ArgumentError("replay stream exhausted");
    return values_[pos_++];
}

double coupling_from_uniform(const DisorderSpec& spec, double u)
{
    if (!(u > 0.0 && u <= 1.0))
        throw ArgumentError("uniform draw must lie in (0,1], got " + num(u));
    if (spec.is_strong())
        return std::pow(u, spec.d());
    const double j0 = spec.j0();
    return j0 + (1.0 - j0) * u;
}

ChainSample chain_from_couplings(std::vector<double> couplings, double s, double gamma)
{
    if (couplings.empty())
        throw SizeError("chain needs at least one coupling");
    for (double j : couplings)
        if (!(j > 0.0 && j <= 1.0))
            throw ValidationError("couplings must lie in (0,1], got " + num(j));
    if (!(s >= 0.0 && s <= 1.0))
        throw ValidationError("s must lie in [0,1], got " + num(s));
    if (!(gamma > 0.0))
        throw ValidationError("gamma must be positive, got " + num(gamma));

    ChainSample out;
    out.n = static_cast<int>(couplings.size()) + 1;
    out.s = s;
    out.gamma = gamma;
    out.fields.resize(static_cast<std::size_t>(out.n));
    const double ln_gamma = std::log(gamma);
    for (int i = 0; i < out.n; ++i) {
        // J_0 = J_N = 1 at the chain ends.
        const double ln_left = i > 0 ? std::log(couplings[static_cast<std::size_t>(i - 1)]) : 0.0;
        const double ln_right = i < out.n - 1 ? std::log(couplings[static_cast<std::size_t>(i)]) : 0.0;
        out.fields[static_cast<std::size_t>(i)] = std::exp(ln_gamma + s * ln_left + (1.0 - s) * ln_right);
    }
    out.couplings = std::move(couplings);
    return out;
}

ChainSample sample_chain(const DisorderSpec& spec, int n, SeedTag tag)
{
    SampleStream stream(tag.master_seed, tag.index);
    ChainSample out = sample_chain(spec, n, stream);
    out.seed_tag = tag;
    return out;
}

CriticalPoint critical_gamma(const DisorderSpec& spec)
{
    spec.validate();
    CriticalPoint cp;
    if (spec.is_strong()) {
        cp.delta_j = -spec.d(); // E[ln U^D] = -D
    } else {
        const double j0 = spec.j0();
        cp.delta_j = (j0 - 1.0 - j0 * std::log(j0)) / (1.0 - j0);
    }
    cp.gamma_c = 1.0;
    return cp;
}

double min_coupling_moment(const DisorderSpec& spec, int n, int m)
{
    spec.validate();
    if (!spec.is_strong())
        throw UnsupportedError("minimum-coupling moment identity holds only for strong disorder");
    if (n < 2)
        throw SizeError("chain needs at least 2 sites, got " + std::to_string(n));
    if (m < 1)
        throw ArgumentError("moment order must be >= 1, got " + std::to_string(m));
    const double a = m * spec.d() + 1.0;
    const double b = n - 1.0;
    const double log_beta = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
    return std::exp(std::log(b) + log_beta);
}

void dump_chain(std::ostream& os, const ChainSample& sample)
{
    const auto old = os.precision(17);
    for (double j : sample.couplings)
        os << j << '\n';
    for (double g : sample.fields)
        os << g << '\n';
    os.precision(old);
}

} // namespace tfi
