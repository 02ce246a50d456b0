#pragma once

// Closed-form gap bounds and exponent bounds.
//
// Per sample:
//   lower:  Delta >= 2 J_min sqrt(min eig T(0,1,G))      (Weyl, M >= 4 J_min^2 LR)
//   upper:  Delta <= sqrt(<psi, 4 J^s T(1,1,G) J^s psi>) (Rayleigh-Ritz)
// with trial vectors psi_j ~ (-1)^j J_{j-1}^{-s} sin(pi j/(N+1)) and
// psi'_j ~ (-1)^j J_j^{-(1-s)} sin(pi j/(N+1)) on the similar matrix M'.

#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "tfi/disorder.hpp"

namespace tfi {

struct BoundReport {
    double lower = 0.0;
    double upper_psi = 0.0;
    double upper_psi_prime = 0.0;
    double j_min = 0.0;

    double upper() const noexcept { return upper_psi < upper_psi_prime ? upper_psi : upper_psi_prime; }
};

struct ZBounds {
    double lower = 1.0;
    double upper = std::numeric_limits<double>::infinity();
};

/// Dense T(t,u,G): diag (t+G^2, 1+G^2, ..., 1+G^2, u+G^2), off-diagonal G.
/// For n = 1 the single entry is t+G^2.
Eigen::MatrixXd t_matrix(double t, double u, double gamma, int n);

/// Smallest eigenvalue of T(t,u,G) by a tridiagonal eigensolve.
double t_min_eigenvalue(double t, double u, double gamma, int n);

/// Eigenvalues of T(0,1,1) = LR at the critical point, descending:
/// eps_k = 2 + 2 cos(k pi / (N + 1/2)), k = 1..N. The smallest is
/// eps_N = 2 - 2 cos(pi / (2N + 1)).
std::vector<double> t_spectrum_critical(int n);

/// Smallest critical eigenvalue, 4 sin^2(pi / (2(2N+1))) without cancellation.
double t_min_critical(int n);

/// 2 J_min sqrt(min eig T(0,1,G)); closed form at G = 1, tridiagonal solve otherwise.
double lower_gap_bound(const ChainSample& sample);

/// Both variational upper bounds plus the lower bound, for any G > 0:
///   upper = 2 C sqrt((N+1)/2 (1 + G^2 - 2 G cos(pi/(N+1)))),
/// which is 2 C sqrt((N+1)(1 - cos(pi/(N+1)))) at G = 1. The normalization
/// constants C_s, C'_s are evaluated by a compensated log-sum-exp.
BoundReport variational_upper_bound(const ChainSample& sample);

/// Weak: z = 1. Strong: max(D(1/2 + |s - 1/2|) + 1/2, 1) <= z <= D + 1.
ZBounds z_bounds(const DisorderSpec& spec);

/// Ensemble moment bounds for overlays.
/// Weak: [Delta^m]_av >= (2 J0)^m eps_N^{m/2}.
double weak_moment_lower_bound(double j0, int n, int m);
/// Strong: [Delta^m]_av >= 2^m (N-1) B(mD+1, N-1) eps_N^{m/2}.
double strong_moment_lower_bound(double d, int n, int m);
/// Both kinds: [Delta^m]_av <= 2^m (2 - 2 cos(pi/(N+1)))^{m/2}.
double moment_upper_bound(int n, int m);

} // namespace tfi
