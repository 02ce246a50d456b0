#pragma once

// Independent reference computations shared by the unit tests.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "tfi/disorder.hpp"

namespace oracle {

// H = -sum J_i Z_i Z_{i+1} - sum G_i X_i on the full 2^N space.
struct DenseSpinChain {
    int n;
    Eigen::VectorXd energies;
    Eigen::VectorXd ground;

    explicit DenseSpinChain(const tfi::ChainSample& c) : n(c.n)
    {
        const int dim = 1 << n;
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        for (int state = 0; state < dim; ++state) {
            for (int i = 0; i + 1 < n; ++i)
                h(state, state) -= c.couplings[i] * z(state, i) * z(state, i + 1);
            for (int i = 0; i < n; ++i)
                h(state ^ (1 << i), state) -= c.fields[i];
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        energies = es.eigenvalues();
        ground = es.eigenvectors().col(0);
    }

    static double z(int state, int site) { return (state >> site) & 1 ? -1.0 : 1.0; }

    double gap() const { return energies(1) - energies(0); }

    double zz(int i, int j) const
    {
        double sum = 0.0;
        for (int state = 0; state < (1 << n); ++state)
            sum += ground(state) * ground(state) * z(state, i) * z(state, j);
        return sum;
    }
};

// Lower bidiagonal matrix with diag fields and subdiag couplings.
inline Eigen::MatrixXd dense_bidiagonal(const std::vector<double>& diag, const std::vector<double>& sub)
{
    const auto n = static_cast<Eigen::Index>(diag.size());
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        b(i, i) = diag[i];
        if (i + 1 < n)
            b(i + 1, i) = sub[i];
    }
    return b;
}

// sigma_min of a positive lower bidiagonal matrix as 1/sqrt(lambda_max(B^-T B^-1)).
// The inverse entries are signed products with no cancellation, so each is
// accurate to a few ulps; the dominant eigenvalue is then well conditioned.
inline double sigma_min_via_inverse(const std::vector<double>& d, const std::vector<double>& e)
{
    const auto n = static_cast<int>(d.size());
    Eigen::MatrixXd logs = Eigen::MatrixXd::Constant(n, n, -INFINITY);
    Eigen::MatrixXd signs = Eigen::MatrixXd::Zero(n, n);
    double peak = -INFINITY;
    for (int j = 0; j < n; ++j) {
        double acc = -std::log(d[j]);
        for (int i = j; i < n; ++i) {
            if (i > j)
                acc += std::log(e[i - 1]) - std::log(d[i]);
            logs(i, j) = acc;
            signs(i, j) = (i - j) % 2 ? -1.0 : 1.0;
            peak = std::max(peak, acc);
        }
    }
    Eigen::MatrixXd inv = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = j; i < n; ++i)
            inv(i, j) = signs(i, j) * std::exp(logs(i, j) - peak);
    const Eigen::MatrixXd g = inv.transpose() * inv;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues()(n - 1);
    return std::exp(-peak) / std::sqrt(top);
}

// Two-sided Kolmogorov-Smirnov distance against a CDF.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf)
{
    std::sort(xs.begin(), xs.end());
    const double m = static_cast<double>(xs.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double f = cdf(xs[k]);
        worst = std::max({worst, std::abs(f - k / m), std::abs((k + 1) / m - f)});
    }
    return worst;
}

} // namespace oracle
