#ifndef SATRACK_FIXED_POINT_HPP
#define SATRACK_FIXED_POINT_HPP

#include <functional>

#include <Eigen/Dense>

namespace satrack {

using Residual2d = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

struct FixedPointResult {
    Eigen::Vector2d root;
    double residual = 0.0;  // sup-norm of residual(root)
    int iterations = 0;
};

/**
 * Root of a 2-D residual by damped fixed-point iteration theta <- theta - w * R(theta).
 *
 * The damping w starts at 1, is halved whenever a trial step fails to
 * decrease |R|_inf (never below 2^-20, where the step is taken anyway),
 * and is doubled back toward 1 after an accepted step. Throws
 * NonConvergenceError carrying the last iterate when max_iter is exhausted.
 */
FixedPointResult solve_fixed_point_2d(const Residual2d& residual, const Eigen::Vector2d& initial,
                                      double tol, int max_iter);

}  // namespace satrack

#endif  // SATRACK_FIXED_POINT_HPP
