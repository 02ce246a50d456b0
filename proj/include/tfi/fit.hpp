#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tfi {

struct LinearFit {
    Eigen::VectorXd params;
    Eigen::MatrixXd covariance;
    Eigen::VectorXd stderrs;
    double chi2 = 0.0;         // weighted residual sum of squares
    double residual_norm = 0.0; // unweighted
    int dof = 0;
};

/// Least squares y ~ X p.
///
/// With weights (1/variance per row) the covariance is (Xᵀ W X)^{-1}, inflated
/// by chi2/dof when that exceeds one. Without weights it is
/// s^2 (Xᵀ X)^{-1} with s^2 = RSS/dof. Solved by column-pivoted QR.
LinearFit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& weights = Eigen::VectorXd());

/// Straight line y = intercept + slope x; params = (intercept, slope).
LinearFit line_fit(std::span<const double> x, std::span<const double> y,
                   std::span<const double> y_stderr = {});

/// Sum in a fixed pairwise order; result is independent of thread count.
double pairwise_sum(std::span<const double> values);

} // namespace tfi
