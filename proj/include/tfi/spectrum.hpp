#pragma once

// Free-fermion spectral problem of a chain sample.
//
// After Jordan-Wigner, the quadratic fermion Hamiltonian is fixed by the
// N x N matrices A (symmetric: A_ii = -2 G_i, A_{i,i+1} = A_{i+1,i} = -J_i)
// and B (antisymmetric: B_{i,i+1} = -J_i, B_{i+1,i} = J_i). Their sum is a
// bidiagonal matrix,
//
//   A + B = -2 Bidᵀ,   Bid = lower bidiagonal(diag G_i, subdiag J_i),
//
// so M = (A - B)(A + B) = 4 Bid Bidᵀ and the quasienergies are
// Lambda_k = 2 sigma_k(Bid). The energy gap is Lambda_1.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tfi/disorder.hpp"

namespace tfi {

/// Lower bidiagonal matrix: B_ii = diag[i], B_{i+1,i} = offdiag[i].
struct BidiagonalOperator {
    std::vector<double> diag;
    std::vector<double> offdiag;

    std::size_t size() const noexcept { return diag.size(); }
};

struct FermionModes {
    Eigen::VectorXd lambdas; // ascending
    Eigen::MatrixXd phi;     // phi(k, i): mode k, site i; rows orthonormal
    Eigen::MatrixXd psi;     // psi(k, i)
};

inline constexpr std::size_t kDefaultDenseLimit = 4096;
inline constexpr int kSpinOracleMaxSites = 12;

BidiagonalOperator build_bidiagonal(const ChainSample& sample);

/// Number of singular values of the lower bidiagonal matrix strictly below
/// sigma (> 0), by the Sturm count of the Golub-Kahan tridiagonal form.
std::size_t count_singular_values_below(std::span<const double> diag,
                                        std::span<const double> offdiag, double sigma);

/// Smallest singular value by bisection in ln(sigma) on the Sturm count.
/// Relative accuracy ~1e-13 independent of how small sigma_min is.
double smallest_singular_value(std::span<const double> diag, std::span<const double> offdiag);

/// Delta = Lambda_1 = 2 sigma_min(B).
double energy_gap(const BidiagonalOperator& op);

/// All Bogoliubov modes from a dense bidiagonal SVD.
///
/// Sign convention: each psi_k has its largest-magnitude entry positive and
/// phi_k = (A+B)ᵀ psi_k / Lambda_k. Zero modes fix phi_k by the same
/// largest-entry rule, so their relative sign is arbitrary.
FermionModes full_modes(const BidiagonalOperator& op, std::size_t dense_limit = kDefaultDenseLimit);

// Dense constructions, used by tests and oracle runs.
Eigen::MatrixXd fermion_matrix_a(const ChainSample& sample);
Eigen::MatrixXd fermion_matrix_b(const ChainSample& sample);
/// (A - B)(A + B) built from the dense fermion matrices.
Eigen::MatrixXd dense_m(const ChainSample& sample);
/// 4 J^s L J_+^{2(1-s)} R J^s with L = lower(diag gamma, subdiag 1), R = Lᵀ.
/// Equals dense_m for chains whose fields follow the tuning rule.
Eigen::MatrixXd factorized_m(const ChainSample& sample);

/// Dense 2^N spin Hamiltonian with free ends, split into the two sectors of
/// the global spin flip prod_i sigma^x_i.
class SpinOracle {
public:
    explicit SpinOracle(const ChainSample& sample);

    /// E_1 - E_0 over the full spectrum.
    double gap() const;
    double ground_energy() const;

    /// <sigma^z_i sigma^z_j> in the ground state (0-based sites). Meaningful
    /// when every field is positive, which makes the ground state unique.
    double zz_correlation(int i, int j) const;

private:
    int n_;
    Eigen::VectorXd even_energies_;
    Eigen::VectorXd odd_energies_;
    Eigen::VectorXd ground_; // even-sector amplitudes over representatives
};

/// Dense spin-Hamiltonian gap; n must not exceed kSpinOracleMaxSites.
double spin_oracle_gap(const ChainSample& sample);

/// Two-column text (diag, offdiag); the last row has an empty offdiag.
void dump_operator(std::ostream& os, const BidiagonalOperator& op);

} // namespace tfi
