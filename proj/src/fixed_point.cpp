#include "satrack/fixed_point.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "satrack/errors.hpp"

namespace satrack {

FixedPointResult solve_fixed_point_2d(const Residual2d& residual, const Eigen::Vector2d& initial,
                                      double tol, int max_iter)
{
    if (!(tol > 0.0)) {
        throw ConfigError("solve_fixed_point_2d: tol must be positive");
    }
    constexpr double min_damping = 0x1.0p-20;

    Eigen::Vector2d theta = initial;
    Eigen::Vector2d r = residual(theta);
    double r_norm = r.lpNorm<Eigen::Infinity>();
    double damping = 1.0;

    for (int iter = 0; iter < max_iter; ++iter) {
        if (r_norm <= tol) {
            return {theta, r_norm, iter};
        }
        const Eigen::Vector2d trial = theta - damping * r;
        const Eigen::Vector2d r_trial = residual(trial);
        const double trial_norm = r_trial.lpNorm<Eigen::Infinity>();
        if (trial_norm < r_norm || damping <= min_damping) {
            theta = trial;
            r = r_trial;
            r_norm = trial_norm;
            damping = std::min(1.0, 2.0 * damping);
        } else {
            damping = std::max(min_damping, 0.5 * damping);
        }
    }
    if (r_norm <= tol) {
        return {theta, r_norm, max_iter};
    }
    throw NonConvergenceError("solve_fixed_point_2d: no convergence after " +
                                  std::to_string(max_iter) + " iterations (residual " +
                                  std::to_string(r_norm) + ")",
                              theta, r_norm);
}

}  // namespace satrack
