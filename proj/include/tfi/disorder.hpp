#pragma once

// Disorder distributions for the correlated-disorder transverse-field Ising
// chain, per-sample random streams, and the field tuning rule.
//
// Couplings J_1..J_{N-1} are i.i.d. on (0,1]; the transverse field on site i
// is tied to the couplings touching it:
//
//   ln(G_i / G) = s ln J_{i-1} + (1 - s) ln J_i,   with J_0 = J_N = 1,
//
// so the end sites see only one coupling each.

#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "tfi/errors.hpp"

namespace tfi {

/// Uniform on (J0, 1], J0 in (0,1).
struct WeakDisorder {
    double j0 = 0.5;
};

/// Power law pi(J) = (1/D) J^{-1+1/D} on (0,1], D > 0.
struct StrongDisorder {
    double d = 1.0;
};

struct DisorderSpec {
    std::variant<WeakDisorder, StrongDisorder> kind = StrongDisorder{};
    double s = 0.5;     // field tuning parameter in [0,1]
    double gamma = 1.0; // overall field scale

    static DisorderSpec weak(double j0, double s, double gamma);
    static DisorderSpec strong(double d, double s, double gamma);

    bool is_strong() const noexcept { return std::holds_alternative<StrongDisorder>(kind); }
    double j0() const; // throws UnsupportedError on strong specs
    double d() const;  // throws UnsupportedError on weak specs

    /// Throws ValidationError naming the offending parameter.
    void validate() const;

    DisorderSpec with_s(double new_s) const;
    DisorderSpec with_gamma(double new_gamma) const;
};

/// Identifies the random stream a sample was drawn from.
struct SeedTag {
    std::uint64_t master_seed = 0;
    std::uint64_t index = 0;

    friend bool operator==(const SeedTag&, const SeedTag&) = default;
};

struct ChainSample {
    int n = 0;
    std::vector<double> couplings; // J_1 .. J_{N-1}
    std::vector<double> fields;    // G_1 .. G_N
    double s = 0.5;                // tuning used to derive the fields
    double gamma = 1.0;
    SeedTag seed_tag;

    /// Coupling-reversed chain: J'_i = J_{N-i}, G'_i = G_{N+1-i}, s' = 1 - s.
    ChainSample mirrored() const;
};

// Per-sample uniform stream.
//
// Construction: k = mix(mix(master_seed) ^ index) where mix is the SplitMix64
// finalizer; the four xoshiro256** state words are the next four SplitMix64
// outputs starting from k. Streams for distinct (master, index) pairs are
// independent for practical purposes, and a sample never depends on how many
// other samples were drawn before it.
class SampleStream {
public:
    SampleStream(std::uint64_t master_seed, std::uint64_t index);

    std::uint64_t next_u64() noexcept;

    /// Uniform on (0,1] with 53-bit resolution; never returns 0.
    double next_unit() noexcept;

private:
    std::uint64_t state_[4];
};

/// Replays a fixed list of uniforms; for tests and hand-evaluated examples.
class ReplayStream {
public:
    explicit ReplayStream(std::vector<double> values);
    double next_unit();

private:
    std::vector<double> values_;
    std::size_t pos_ = 0;
};

template <class T>
concept UniformSource = requires(T& source) {
    { source.next_unit() } -> std::convertible_to<double>;
};

std::uint64_t splitmix64_mix(std::uint64_t x) noexcept;

/// Inverse CDF: Weak J = J0 + (1-J0) u; Strong J = u^D. u must lie in (0,1].
double coupling_from_uniform(const DisorderSpec& spec, double u);

/// Applies the tuning rule to a coupling list. Couplings must lie in (0,1].
ChainSample chain_from_couplings(std::vector<double> couplings, double s, double gamma);

template <UniformSource Source>
ChainSample sample_chain(const DisorderSpec& spec, int n, Source& source)
{
    spec.validate();
    if (n < 2)
        throw SizeError("chain needs at least 2 sites, got " + std::to_string(n));
    std::vector<double> couplings(static_cast<std::size_t>(n - 1));
    for (auto& j : couplings)
        j = coupling_from_uniform(spec, source.next_unit());
    return chain_from_couplings(std::move(couplings), spec.s, spec.gamma);
}

/// Draws sample `tag.index` of the ensemble seeded by `tag.master_seed`.
ChainSample sample_chain(const DisorderSpec& spec, int n, SeedTag tag);

struct CriticalPoint {
    double gamma_c = 1.0;
    double delta_j = 0.0; // disorder average of ln J
};

/// Gamma_c solves [ln J]_av = [ln G_i]_av. The tuning rule makes
/// [ln G_i]_av = ln G + [ln J]_av in the bulk, so Gamma_c = 1 for every s.
CriticalPoint critical_gamma(const DisorderSpec& spec);

/// [(J_min)^m]_av = (N-1) B(mD+1, N-1) over the N-1 couplings of a strong
/// disorder chain, evaluated through lgamma.
double min_coupling_moment(const DisorderSpec& spec, int n, int m);

/// Debug dump: couplings then fields, one value per line, 17 significant digits.
void dump_chain(std::ostream& os, const ChainSample& sample);

} // namespace tfi
