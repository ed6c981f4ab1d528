#ifndef SATRACK_QUADRATURE_HPP
#define SATRACK_QUADRATURE_HPP

#include <functional>
#include <span>
#include <vector>

#include "satrack/types.hpp"

namespace satrack {

using ScalarFunction = std::function<double(double)>;

/// Gauss-Legendre rule on [-1, 1].
class GaussLegendre {
  public:
    explicit GaussLegendre(int nodes);

    int size() const { return static_cast<int>(nodes_.size()); }
    const Vector& nodes() const { return nodes_; }
    const Vector& weights() const { return weights_; }

    /// Composite integral of f over [a, b]: the range is cut at every
    /// breakpoint inside it and then into panels no wider than `max_panel`.
    double integrate(const ScalarFunction& f, double a, double b,
                     std::span<const double> breakpoints = {}, double max_panel = 1.0) const;

  private:
    Vector nodes_;
    Vector weights_;
};

/// Half-width (in standard deviations) of the truncated range used for
/// Gaussian expectations; the omitted mass is below 1e-32.
inline constexpr double kGaussianSpan = 12.0;

/**
 * E[f(sigma * Z)] for Z standard normal.
 *
 * `breakpoints` are points in x-space where f may jump (indicator clips);
 * the integration range is split there so each panel sees a smooth integrand.
 * Throws ConfigError when nodes < 16.
 */
double gauss_expectation(const ScalarFunction& f, double sigma, int nodes = 16,
                         std::span<const double> breakpoints = {});

/// As above with a prebuilt rule, for repeated evaluation.
double gauss_expectation(const GaussLegendre& rule, const ScalarFunction& f, double sigma,
                         std::span<const double> breakpoints = {});

}  // namespace satrack

#endif  // SATRACK_QUADRATURE_HPP
