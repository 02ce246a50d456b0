#include "tfi/fit.hpp"

#include <algorithm>
#include <cmath>

#include "tfi/errors.hpp"

namespace tfi {

LinearFit least_squares(const Eigen::MatrixXd& design, const Eigen::VectorXd& y, const Eigen::VectorXd& weights)
{
    const Eigen::Index rows = design.rows();
    const Eigen::Index cols = design.cols();
    if (rows != y.size())
        throw ArgumentError("design and response sizes differ");
    if (rows < cols)
        throw ArgumentError("fewer data points than parameters");
    const bool weighted = weights.size() > 0;
    if (weighted && weights.size() != rows)
        throw ArgumentError("weights and response sizes differ");

    Eigen::VectorXd root_w = weighted ? Eigen::VectorXd(weights.cwiseSqrt()) : Eigen::VectorXd::Ones(rows);
    const Eigen::MatrixXd a = root_w.asDiagonal() * design;
    const Eigen::VectorXd b = root_w.asDiagonal() * y;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < cols)
        throw NumericError("design matrix is rank deficient");

    LinearFit fit;
    fit.params = qr.solve(b);
    fit.dof = static_cast<int>(rows - cols);
    fit.chi2 = (a * fit.params - b).squaredNorm();
    fit.residual_norm = (design * fit.params - y).norm();

    const Eigen::MatrixXd normal_inv = (a.transpose() * a).inverse();
    double scale = 1.0;
    if (!weighted)
        scale = fit.dof > 0 ? fit.chi2 / fit.dof : 0.0;
    else if (fit.dof > 0)
        scale = std::max(1.0, fit.chi2 / fit.dof);
    fit.covariance = scale * normal_inv;
    fit.stderrs = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    return fit;
}

LinearFit line_fit(std::span<const double> x, std::span<const double> y, std::span<const double> y_stderr)
{
    const auto n = static_cast<Eigen::Index>(x.size());
    if (y.size() != x.size())
        throw ArgumentError("x and y sizes differ");
    Eigen::MatrixXd design(n, 2);
    Eigen::VectorXd rhs(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        design(i, 0) = 1.0;
        design(i, 1) = x[static_cast<std::size_t>(i)];
        rhs(i) = y[static_cast<std::size_t>(i)];
    }
    bool use_weights = !y_stderr.empty();
    if (use_weights && y_stderr.size() != x.size())
        throw ArgumentError("stderr and y sizes differ");
    // Any exact point (zero stderr) makes the weighting singular; fall back to OLS.
    for (double se : y_stderr)
        if (!(se > 0.0) || !std::isfinite(se))
            use_weights = false;
    if (!use_weights)
        return least_squares(design, rhs);
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double se = y_stderr[static_cast<std::size_t>(i)];
        w(i) = 1.0 / (se * se);
    }
    return least_squares(design, rhs, w);
}

double pairwise_sum(std::span<const double> values)
{
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values)
            s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

} // namespace tfi
