#include "tfi/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace tfi {

namespace {

constexpr double kPi = std::numbers::pi;

// ln sum_j exp(terms_j) with Neumaier-compensated accumulation of the
// max-shifted exponentials.
double log_sum_exp(const std::vector<double>& terms)
{
    const double peak = *std::max_element(terms.begin(), terms.end());
    double sum = 0.0;
    double carry = 0.0;
    for (double t : terms) {
        const double x = std::exp(t - peak);
        const double next = sum + x;
        carry += std::abs(sum) >= std::abs(x) ? (sum - next) + x : (x - next) + sum;
        sum = next;
    }
    return peak + std::log(sum + carry);
}

// ln C for C = (sum_j w_j^{-2p} sin^2(pi j/(N+1)))^{-1/2}, j = 1..N, where
// log_weights[j-1] = ln w_j.
double log_normalization(const std::vector<double>& log_weights, double p)
{
    const std::size_t n = log_weights.size();
    std::vector<double> terms(n);
    for (std::size_t j = 1; j <= n; ++j) {
        const double sine = std::sin(kPi * static_cast<double>(j) / static_cast<double>(n + 1));
        terms[j - 1] = -2.0 * p * log_weights[j - 1] + 2.0 * std::log(sine);
    }
    return -0.5 * log_sum_exp(terms);
}

void require_sites(int n)
{
    if (n < 1)
        throw SizeError("need at least one site, got " + std::to_string(n));
}

} // namespace

Eigen::MatrixXd t_matrix(double t, double u, double gamma, int n)
{
    require_sites(n);
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    const double g2 = gamma * gamma;
    for (int i = 0; i < n; ++i) {
        m(i, i) = 1.0 + g2;
        if (i + 1 < n) {
            m(i, i + 1) = gamma;
            m(i + 1, i) = gamma;
        }
    }
    if (n == 1) {
        m(0, 0) = t + g2;
    } else {
        m(0, 0) = t + g2;
        m(n - 1, n - 1) = u + g2;
    }
    return m;
}

double t_min_eigenvalue(double t, double u, double gamma, int n)
{
    require_sites(n);
    Eigen::VectorXd diag = Eigen::VectorXd::Constant(n, 1.0 + gamma * gamma);
    diag(0) = t + gamma * gamma;
    if (n > 1)
        diag(n - 1) = u + gamma * gamma;
    if (n == 1)
        return diag(0);
    Eigen::VectorXd sub = Eigen::VectorXd::Constant(n - 1, gamma);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericError("tridiagonal eigensolve failed");
    return solver.eigenvalues()(0);
}

std::vector<double> t_spectrum_critical(int n)
{
    require_sites(n);
    std::vector<double> eps(static_cast<std::size_t>(n));
    const double denom = n + 0.5;
    for (int k = 1; k <= n; ++k)
        eps[static_cast<std::size_t>(k - 1)] = 2.0 + 2.0 * std::cos(k * kPi / denom);
    // The last entry via the half-angle form, free of cancellation.
    eps.back() = t_min_critical(n);
    return eps;
}

double t_min_critical(int n)
{
    require_sites(n);
    const double half = std::sin(kPi / (2.0 * (2.0 * n + 1.0)));
    return 4.0 * half * half;
}

double lower_gap_bound(const ChainSample& sample)
{
    const double j_min = *std::min_element(sample.couplings.begin(), sample.couplings.end());
    const double eps = sample.gamma == 1.0 ? t_min_critical(sample.n)
                                           : t_min_eigenvalue(0.0, 1.0, sample.gamma, sample.n);
    return 2.0 * j_min * std::sqrt(std::max(eps, 0.0));
}

BoundReport variational_upper_bound(const ChainSample& sample)
{
    const int n = sample.n;
    BoundReport report;
    report.j_min = *std::min_element(sample.couplings.begin(), sample.couplings.end());
    report.lower = lower_gap_bound(sample);

    // psi uses J_{j-1} with J_0 = 1; psi' uses J_j with J_N = 1.
    std::vector<double> log_left(static_cast<std::size_t>(n), 0.0);
    std::vector<double> log_right(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i + 1 < n; ++i) {
        const double lj = std::log(sample.couplings[static_cast<std::size_t>(i)]);
        log_left[static_cast<std::size_t>(i + 1)] = lj;
        log_right[static_cast<std::size_t>(i)] = lj;
    }
    const double log_c = log_normalization(log_left, sample.s);
    const double log_c_prime = log_normalization(log_right, 1.0 - sample.s);

    // <v, T(1,1,G) v> for v_j = (-1)^j sin(pi j/(N+1)), over sum sin^2.
    const double g = sample.gamma;
    const double half = std::sin(kPi / (2.0 * (n + 1.0)));
    const double quad = (1.0 - g) * (1.0 - g) + 4.0 * g * half * half;
    const double factor = 2.0 * std::sqrt(0.5 * (n + 1.0) * quad);
    report.upper_psi = factor * std::exp(log_c);
    report.upper_psi_prime = factor * std::exp(log_c_prime);
    return report;
}

ZBounds z_bounds(const DisorderSpec& spec)
{
    spec.validate();
    if (!spec.is_strong())
        return ZBounds{1.0, 1.0};
    const double d = spec.d();
    const double lower = std::max(d * (0.5 + std::abs(spec.s - 0.5)) + 0.5, 1.0);
    return ZBounds{lower, d + 1.0};
}

double weak_moment_lower_bound(double j0, int n, int m)
{
    return std::pow(2.0 * j0, m) * std::pow(t_min_critical(n), 0.5 * m);
}

double strong_moment_lower_bound(double d, int n, int m)
{
    const double jmin_moment = min_coupling_moment(DisorderSpec::strong(d, 0.5, 1.0), n, m);
    return std::pow(2.0, m) * jmin_moment * std::pow(t_min_critical(n), 0.5 * m);
}

double moment_upper_bound(int n, int m)
{
    require_sites(n);
    const double half = std::sin(kPi / (2.0 * (n + 1.0)));
    return std::pow(2.0, m) * std::pow(4.0 * half * half, 0.5 * m);
}

} // namespace tfi
