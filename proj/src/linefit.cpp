#include "satrack/linefit.hpp"

#include <cmath>

#include "satrack/errors.hpp"

namespace satrack {

LineFit fit_line(std::span<const std::pair<double, double>> points)
{
    const auto n = static_cast<double>(points.size());
    double mx = 0.0;
    double my = 0.0;
    for (const auto& [x, y] : points) {
        mx += x;
        my += y;
    }
    if (points.size() >= 1) {
        mx /= n;
        my /= n;
    }
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& [x, y] : points) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if (points.size() < 2 || !(sxx > 0.0)) {
        throw InputError("fit_line: need at least two points with distinct x");
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss = 0.0;
    for (const auto& [x, y] : points) {
        const double r = y - (fit.slope * x + fit.intercept);
        ss += r * r;
    }
    fit.residual_norm = std::sqrt(ss);
    return fit;
}

}  // namespace satrack
