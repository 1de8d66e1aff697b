#ifndef SKLAB_EXTRAPOLATION_HPP
#define SKLAB_EXTRAPOLATION_HPP

#include <cmath>
#include <set>
#include <vector>

#include "constants.hpp"
#include "errors.hpp"

namespace sklab {

struct DensityPoint {
    int n = 0;
    double mean = 0.0;
    double stderr_of_mean = 0.0;
};

/// mean(n) = intercept + slope * n^(-omega), fitted by weighted least squares.
struct ExtrapolationFit {
    double omega = 2.0 / 3.0;
    double intercept = 0.0;
    double slope = 0.0;
    double intercept_stderr = 0.0;
    double slope_stderr = 0.0;
    double residual_norm = 0.0;  ///< Euclidean norm of (mean - model)
    double chi2 = 0.0;           ///< weighted sum of squared residuals
    bool weighted = false;
    std::vector<DensityPoint> points;

    [[nodiscard]] double predict(int n) const { return intercept + slope * std::pow(static_cast<double>(n), -omega); }
};

/// Weights are 1/stderr^2 when every point has a positive stderr; otherwise
/// all points get unit weight and the parameter errors are scaled by the
/// residual variance.
[[nodiscard]] inline ExtrapolationFit extrapolate_density(const std::vector<DensityPoint>& points,
                                                          double omega = 2.0 / 3.0) {
    std::set<int> sizes;
    for (const auto& p : points) sizes.insert(p.n);
    if (sizes.size() < 3) throw InvalidArgument("extrapolation needs at least 3 distinct n values");
    if (!(omega > 0.0)) throw InvalidArgument("extrapolation exponent must be positive");

    bool weighted = true;
    for (const auto& p : points) weighted = weighted && p.stderr_of_mean > 0.0;

    // Normal equations for y = c + a x.
    double sw = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& p : points) {
        const double w = weighted ? 1.0 / (p.stderr_of_mean * p.stderr_of_mean) : 1.0;
        const double x = std::pow(static_cast<double>(p.n), -omega);
        sw += w;
        sx += w * x;
        sy += w * p.mean;
        sxx += w * x * x;
        sxy += w * x * p.mean;
    }
    // Centered form keeps the determinant well conditioned.
    const double xbar = sx / sw;
    const double ybar = sy / sw;
    double sxx_c = 0.0, sxy_c = 0.0;
    for (const auto& p : points) {
        const double w = weighted ? 1.0 / (p.stderr_of_mean * p.stderr_of_mean) : 1.0;
        const double dx = std::pow(static_cast<double>(p.n), -omega) - xbar;
        sxx_c += w * dx * dx;
        sxy_c += w * dx * (p.mean - ybar);
    }
    if (!(sxx_c > 0.0)) throw InvalidArgument("extrapolation design matrix is singular");

    ExtrapolationFit fit;
    fit.omega = omega;
    fit.weighted = weighted;
    fit.points = points;
    fit.slope = sxy_c / sxx_c;
    fit.intercept = ybar - fit.slope * xbar;

    double rss = 0.0;
    for (const auto& p : points) {
        const double w = weighted ? 1.0 / (p.stderr_of_mean * p.stderr_of_mean) : 1.0;
        const double r = p.mean - fit.predict(p.n);
        rss += r * r;
        fit.chi2 += w * r * r;
    }
    fit.residual_norm = std::sqrt(rss);

    // Covariance of (intercept, slope) is sigma^2 (X^T W X)^-1.
    const double dof = static_cast<double>(points.size()) - 2.0;
    const double sigma2 = weighted ? 1.0 : (dof > 0.0 ? fit.chi2 / dof : 0.0);
    fit.slope_stderr = std::sqrt(sigma2 / sxx_c);
    fit.intercept_stderr = std::sqrt(sigma2 * (1.0 / sw + xbar * xbar / sxx_c));
    return fit;
}

struct BoundCheck {
    double intercept = 0.0;
    double intercept_stderr = 0.0;
    double bound = 0.0;                   ///< -b*/4 - 1/(4 b*)
    double simulated = 0.0;               ///< quoted simulation value, comparison only
    double margin = 0.0;                  ///< intercept - bound
    double distance_to_simulated = 0.0;   ///< intercept - simulated
    bool pass = false;                    ///< intercept >= bound - 3 stderr
};

[[nodiscard]] inline BoundCheck check_paper_bound(const ExtrapolationFit& fit) {
    const auto& c = paper_constants();
    BoundCheck check;
    check.intercept = fit.intercept;
    check.intercept_stderr = fit.intercept_stderr;
    check.bound = c.epsilon_bound;
    check.simulated = c.simulated_ground_state;
    check.margin = fit.intercept - c.epsilon_bound;
    check.distance_to_simulated = fit.intercept - c.simulated_ground_state;
    check.pass = fit.intercept >= c.epsilon_bound - 3.0 * fit.intercept_stderr;
    return check;
}

}  // namespace sklab

#endif  // SKLAB_EXTRAPOLATION_HPP
