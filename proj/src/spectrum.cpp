#include "tfi/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include <lapacke.h>

namespace tfi {

namespace {

void require_finite(std::span<const double> values, const char* what)
{
    for (double v : values)
        if (!std::isfinite(v))
            throw NumericError(std::string("non-finite entry in ") + what);
}

void require_shape(std::span<const double> diag, std::span<const double> offdiag)
{
    if (diag.empty())
        throw SizeError("bidiagonal operator is empty");
    if (offdiag.size() + 1 != diag.size())
        throw SizeError("offdiag must have one entry fewer than diag");
}

// Golub-Kahan tridiagonal of the bidiagonal: zero diagonal, off-diagonal
// d_1, e_1, d_2, e_2, ..., d_n. Its eigenvalues are +-sigma_k.
std::vector<double> squared_tgk_offdiag(std::span<const double> diag, std::span<const double> offdiag,
                                        double scale)
{
    const std::size_t n = diag.size();
    std::vector<double> t2(2 * n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = diag[i] / scale;
        t2[2 * i] = d * d;
        if (i + 1 < n) {
            const double e = offdiag[i] / scale;
            t2[2 * i + 1] = e * e;
        }
    }
    return t2;
}

// Negative pivots of (TGK - sigma I) minus n.
std::size_t sturm_count(const std::vector<double>& t2, std::size_t n, double sigma, double pivmin)
{
    // Tiny pivots are replaced by -pivmin before they are counted.
    double q = -sigma;
    if (std::abs(q) <= pivmin)
        q = -pivmin;
    std::size_t negatives = q < 0.0 ? 1 : 0;
    for (double b2 : t2) {
        q = -sigma - b2 / q;
        if (std::abs(q) <= pivmin)
            q = -pivmin;
        negatives += q < 0.0 ? 1 : 0;
    }
    return negatives - n;
}

double pivot_floor(const std::vector<double>& t2)
{
    double max_b2 = 1.0;
    for (double b2 : t2)
        max_b2 = std::max(max_b2, b2);
    return std::numeric_limits<double>::min() * max_b2;
}

} // namespace

BidiagonalOperator build_bidiagonal(const ChainSample& sample)
{
    return BidiagonalOperator{sample.fields, sample.couplings};
}

std::size_t count_singular_values_below(std::span<const double> diag, std::span<const double> offdiag,
                                        double sigma)
{
    require_shape(diag, offdiag);
    const auto t2 = squared_tgk_offdiag(diag, offdiag, 1.0);
    return sturm_count(t2, diag.size(), sigma, pivot_floor(t2));
}

double smallest_singular_value(std::span<const double> diag, std::span<const double> offdiag)
{
    require_shape(diag, offdiag);
    require_finite(diag, "bidiagonal diag");
    require_finite(offdiag, "bidiagonal offdiag");

    const std::size_t n = diag.size();
    double scale = 0.0;
    for (double v : diag)
        scale = std::max(scale, std::abs(v));
    for (double v : offdiag)
        scale = std::max(scale, std::abs(v));
    if (scale == 0.0)
        return 0.0;

    // det(B) = prod d_i. A zero diagonal entry makes B exactly singular.
    double log_det = 0.0;
    for (double d : diag) {
        if (d == 0.0)
            return 0.0;
        log_det += std::log(std::abs(d) / scale);
    }

    const auto t2 = squared_tgk_offdiag(diag, offdiag, scale);
    const double pivmin = pivot_floor(t2);

    // Gershgorin on TGK bounds sigma_max; prod sigma_k = |det B| then bounds
    // sigma_min from below.
    double upper = 0.0;
    for (std::size_t k = 0; k < t2.size() + 1; ++k) {
        const double left = k > 0 ? std::sqrt(t2[k - 1]) : 0.0;
        const double right = k < t2.size() ? std::sqrt(t2[k]) : 0.0;
        upper = std::max(upper, left + right);
    }
    double log_hi = std::log(upper) + 1e-6;
    double log_lo = log_det - static_cast<double>(n - 1) * std::log(upper) - 1e-6;

    const double log_floor = std::log(std::numeric_limits<double>::min()) + 40.0;
    if (log_lo < log_floor) {
        log_lo = log_floor;
        if (sturm_count(t2, n, std::exp(log_lo), pivmin) >= 1)
            return 0.0; // below the representable range
    }

    constexpr double kLogTolerance = 1e-14;
    for (int iter = 0; iter < 400 && log_hi - log_lo > kLogTolerance; ++iter) {
        const double mid = 0.5 * (log_lo + log_hi);
        if (sturm_count(t2, n, std::exp(mid), pivmin) >= 1)
            log_hi = mid;
        else
            log_lo = mid;
    }
    return scale * std::exp(0.5 * (log_lo + log_hi));
}

double energy_gap(const BidiagonalOperator& op)
{
    return 2.0 * smallest_singular_value(op.diag, op.offdiag);
}

FermionModes full_modes(const BidiagonalOperator& op, std::size_t dense_limit)
{
    require_shape(op.diag, op.offdiag);
    require_finite(op.diag, "bidiagonal diag");
    require_finite(op.offdiag, "bidiagonal offdiag");
    const std::size_t n = op.size();
    if (n > dense_limit)
        throw CapabilityError("full_modes: N=" + std::to_string(n) + " exceeds the dense limit " +
                              std::to_string(dense_limit) + "; use energy_gap for the gap alone");

    const auto ni = static_cast<lapack_int>(n);
    std::vector<double> d = op.diag;
    std::vector<double> e = op.offdiag;
    e.resize(std::max<std::size_t>(n, 1)); // dbdsdc wants n-1 entries but tolerates padding
    Eigen::MatrixXd u(n, n);
    Eigen::MatrixXd vt(n, n);
    const lapack_int info = LAPACKE_dbdsdc(LAPACK_COL_MAJOR, 'L', 'I', ni, d.data(), e.data(), u.data(), ni,
                                           vt.data(), ni, nullptr, nullptr);
    if (info != 0)
        throw NumericError("dbdsdc failed with info=" + std::to_string(info));

    // Bid = U S Vᵀ, A + B = -2 Bidᵀ, so (A+B) u_k = 2 s_k (-v_k):
    // phi_k = u_k, psi_k = -v_k. dbdsdc orders s descending.
    FermionModes modes;
    modes.lambdas.resize(static_cast<Eigen::Index>(n));
    modes.phi.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    modes.psi.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t k = 0; k < n; ++k) {
        const auto src = static_cast<Eigen::Index>(n - 1 - k);
        const auto row = static_cast<Eigen::Index>(k);
        modes.lambdas(row) = 2.0 * d[static_cast<std::size_t>(src)];
        modes.phi.row(row) = u.col(src).transpose();
        modes.psi.row(row) = -vt.row(src);

        Eigen::Index at = 0;
        modes.psi.row(row).cwiseAbs().maxCoeff(&at);
        if (modes.psi(row, at) < 0.0) {
            modes.psi.row(row) *= -1.0;
            modes.phi.row(row) *= -1.0;
        }
        if (modes.lambdas(row) == 0.0) {
            modes.phi.row(row).cwiseAbs().maxCoeff(&at);
            if (modes.phi(row, at) < 0.0)
                modes.phi.row(row) *= -1.0;
        }
    }
    return modes;
}

Eigen::MatrixXd fermion_matrix_a(const ChainSample& sample)
{
    const int n = sample.n;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        a(i, i) = -2.0 * sample.fields[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < n; ++i) {
        a(i, i + 1) = -sample.couplings[static_cast<std::size_t>(i)];
        a(i + 1, i) = -sample.couplings[static_cast<std::size_t>(i)];
    }
    return a;
}

Eigen::MatrixXd fermion_matrix_b(const ChainSample& sample)
{
    const int n = sample.n;
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) {
        b(i, i + 1) = -sample.couplings[static_cast<std::size_t>(i)];
        b(i + 1, i) = sample.couplings[static_cast<std::size_t>(i)];
    }
    return b;
}

Eigen::MatrixXd dense_m(const ChainSample& sample)
{
    const Eigen::MatrixXd a = fermion_matrix_a(sample);
    const Eigen::MatrixXd b = fermion_matrix_b(sample);
    return (a - b) * (a + b);
}

Eigen::MatrixXd factorized_m(const ChainSample& sample)
{
    const int n = sample.n;
    const double s = sample.s;
    Eigen::VectorXd j_left(n);  // diag J: 1, J_1, ..., J_{N-1}
    Eigen::VectorXd j_right(n); // diag J_+: J_1, ..., J_{N-1}, 1
    j_left(0) = 1.0;
    j_right(n - 1) = 1.0;
    for (int i = 0; i + 1 < n; ++i) {
        j_left(i + 1) = sample.couplings[static_cast<std::size_t>(i)];
        j_right(i) = sample.couplings[static_cast<std::size_t>(i)];
    }
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        l(i, i) = sample.gamma;
        if (i > 0)
            l(i, i - 1) = 1.0;
    }
    const Eigen::VectorXd left = j_left.array().pow(s);
    const Eigen::VectorXd middle = j_right.array().pow(2.0 * (1.0 - s));
    return 4.0 * left.asDiagonal() * l * middle.asDiagonal() * l.transpose() * left.asDiagonal();
}

SpinOracle::SpinOracle(const ChainSample& sample) : n_(sample.n)
{
    if (n_ < 2 || n_ > kSpinOracleMaxSites)
        throw CapabilityError("spin oracle supports 2.." + std::to_string(kSpinOracleMaxSites) +
                              " sites, got " + std::to_string(n_));
    const std::size_t dim = std::size_t{1} << (n_ - 1);
    const std::size_t top = std::size_t{1} << (n_ - 1);
    const std::size_t all = (std::size_t{1} << n_) - 1;

    // Basis (|r> +- |~r>)/sqrt2 over representatives r with the top bit clear;
    // bit i set means sigma^z_i = -1.
    Eigen::MatrixXd even = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    Eigen::MatrixXd odd = even;
    for (std::size_t r = 0; r < dim; ++r) {
        double zz = 0.0;
        for (int i = 0; i + 1 < n_; ++i) {
            const bool flipped = (((r >> i) ^ (r >> (i + 1))) & 1U) != 0;
            zz -= sample.couplings[static_cast<std::size_t>(i)] * (flipped ? -1.0 : 1.0);
        }
        const auto col = static_cast<Eigen::Index>(r);
        even(col, col) += zz;
        odd(col, col) += zz;
        for (int i = 0; i < n_; ++i) {
            std::size_t partner = r ^ (std::size_t{1} << i);
            double odd_sign = 1.0;
            if (partner & top) {
                partner ^= all;
                odd_sign = -1.0;
            }
            const auto row = static_cast<Eigen::Index>(partner);
            const double g = sample.fields[static_cast<std::size_t>(i)];
            even(row, col) -= g;
            odd(row, col) -= g * odd_sign;
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> even_solver(even, Eigen::ComputeEigenvectors);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> odd_solver(odd, Eigen::EigenvaluesOnly);
    if (even_solver.info() != Eigen::Success || odd_solver.info() != Eigen::Success)
        throw NumericError("spin oracle eigensolve failed");
    even_energies_ = even_solver.eigenvalues();
    odd_energies_ = odd_solver.eigenvalues();
    ground_ = even_solver.eigenvectors().col(0);
}

double SpinOracle::ground_energy() const
{
    return std::min(even_energies_(0), odd_energies_(0));
}

double SpinOracle::gap() const
{
    std::vector<double> lowest{even_energies_(0), odd_energies_(0)};
    if (even_energies_.size() > 1)
        lowest.push_back(even_energies_(1));
    if (odd_energies_.size() > 1)
        lowest.push_back(odd_energies_(1));
    std::sort(lowest.begin(), lowest.end());
    return lowest[1] - lowest[0];
}

double SpinOracle::zz_correlation(int i, int j) const
{
    if (i < 0 || j < 0 || i >= n_ || j >= n_)
        throw ArgumentError("site index out of range");
    double sum = 0.0;
    for (Eigen::Index r = 0; r < ground_.size(); ++r) {
        const auto bits = static_cast<std::size_t>(r);
        const bool differ = (((bits >> i) ^ (bits >> j)) & 1U) != 0;
        sum += ground_(r) * ground_(r) * (differ ? -1.0 : 1.0);
    }
    return sum;
}

double spin_oracle_gap(const ChainSample& sample)
{
    return SpinOracle(sample).gap();
}

void dump_operator(std::ostream& os, const BidiagonalOperator& op)
{
    const auto old = os.precision(17);
    for (std::size_t i = 0; i < op.diag.size(); ++i) {
        os << op.diag[i] << ' ';
        if (i < op.offdiag.size())
            os << op.offdiag[i];
        os << '\n';
    }
    os.precision(old);
}

} // namespace tfi
