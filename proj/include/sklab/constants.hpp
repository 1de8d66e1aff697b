#ifndef SKLAB_CONSTANTS_HPP
#define SKLAB_CONSTANTS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/tools/toms748_solve.hpp>

namespace sklab {

/// 4 log 2, the inverse temperature where the annealed curve meets beta * f(1).
inline constexpr double kBetaStar = 4.0 * std::numbers::ln2;
inline constexpr double kBetaOne = 1.0;
/// Ground-state density quoted from replica-based simulations, for comparison only.
inline constexpr double kSimulatedGroundStateDensity = -0.7633;
/// Spherical-model free-energy bound, for comparison only.
inline constexpr double kSphericalBound = 2.2058;

struct PaperConstants {
    double beta_star = kBetaStar;
    double beta_one = kBetaOne;
    double f_one_limit = std::numbers::ln2 + 0.25;                             ///< log 2 + 1/4
    double f_star_claimed = kBetaStar * kBetaStar / 4.0 + 0.25;                 ///< b*^2/4 + 1/4
    double annealed_at_star = std::numbers::ln2 + kBetaStar * kBetaStar / 4.0;  ///< log 2 + b*^2/4
    double epsilon_bound = -kBetaStar / 4.0 - 1.0 / (4.0 * kBetaStar);          ///< -b*/4 - 1/(4 b*)
    double beta_c_rem = 2.0 * std::sqrt(std::numbers::ln2);                     ///< REM critical point
    double spherical_bound = kSphericalBound;
    double simulated_ground_state = kSimulatedGroundStateDensity;
};

[[nodiscard]] inline const PaperConstants& paper_constants() {
    static const PaperConstants constants{};
    return constants;
}

/// Named relation between constants with its absolute discrepancy.
struct ConstantIdentity {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    [[nodiscard]] double residual() const { return std::abs(lhs - rhs); }
};

[[nodiscard]] inline std::vector<ConstantIdentity> constant_identities() {
    const auto& c = paper_constants();
    return {
        {"beta_star == beta_c_rem^2", c.beta_star, c.beta_c_rem * c.beta_c_rem},
        {"annealed_at_star == beta_star * f_one_limit", c.annealed_at_star, c.beta_star * c.f_one_limit},
        {"f_star_claimed == beta_star*log2 + 1/4", c.f_star_claimed, c.beta_star * std::numbers::ln2 + 0.25},
        {"epsilon_bound == -f_star_claimed / beta_star", c.epsilon_bound, -c.f_star_claimed / c.beta_star},
    };
}

/// log 2 + beta^2/4 - beta (log 2 + 1/4); zero at beta = 1 and beta = 4 log 2.
[[nodiscard]] inline double beta_star_equation(double beta) {
    return std::numbers::ln2 + beta * beta / 4.0 - beta * (std::numbers::ln2 + 0.25);
}

/// Both roots of beta_star_equation by bracketed TOMS 748 iteration.
[[nodiscard]] inline std::array<double, 2> solve_beta_star() {
    auto solve = [](double lo, double hi) {
        boost::uintmax_t iterations = 200;
        const auto [a, b] = boost::math::tools::toms748_solve(
            beta_star_equation, lo, hi, boost::math::tools::eps_tolerance<double>(52), iterations);
        return 0.5 * (a + b);
    };
    return {solve(0.5, 1.5), solve(2.0, 3.5)};
}

struct FigureRow {
    double beta = 0.0;
    double annealed = 0.0;  ///< log 2 + beta^2/4
    double linear = 0.0;    ///< beta (log 2 + 1/4)
    std::string marker;     ///< "beta_one", "beta_star" or empty
};

/// Plot data for the annealed curve and the line through the origin; rows at
/// beta = 1 and beta = 4 log 2 are always present and marked.
[[nodiscard]] inline std::vector<FigureRow> emit_figure_data(std::vector<double> betas) {
    betas.push_back(kBetaOne);
    betas.push_back(kBetaStar);
    std::sort(betas.begin(), betas.end());
    betas.erase(std::unique(betas.begin(), betas.end()), betas.end());
    std::vector<FigureRow> rows;
    rows.reserve(betas.size());
    for (double b : betas) {
        FigureRow row;
        row.beta = b;
        row.annealed = std::numbers::ln2 + b * b / 4.0;
        row.linear = b * (std::numbers::ln2 + 0.25);
        if (b == kBetaOne) row.marker = "beta_one";
        if (b == kBetaStar) row.marker = "beta_star";
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace sklab

#endif  // SKLAB_CONSTANTS_HPP
