#ifndef SATRACK_LINEFIT_HPP
#define SATRACK_LINEFIT_HPP

#include <span>
#include <utility>

namespace satrack {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_norm = 0.0;
};

/// Ordinary least squares y ~ slope * x + intercept. Callers pass
/// log2-transformed coordinates when reading off convergence rates.
/// Throws InputError unless at least two distinct x values are present.
LineFit fit_line(std::span<const std::pair<double, double>> points);

}  // namespace satrack

#endif  // SATRACK_LINEFIT_HPP
