#include "satrack/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "satrack/errors.hpp"
#include "satrack/normal.hpp"

namespace satrack {

GaussLegendre::GaussLegendre(int n) : nodes_(n), weights_(n)
{
    if (n < 1) {
        throw ConfigError("GaussLegendre: need at least one node");
    }
    if (n == 1) {
        nodes_[0] = 0.0;
        weights_[0] = 2.0;
        return;
    }
    const auto legendre = [n](double x, double& p_prev) {
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        p_prev = p0;
        return p1;
    };
    // Newton on P_n; the rule is symmetric so only half the roots are needed.
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        for (int iter = 0; iter < 100; ++iter) {
            double p_prev = 0.0;
            const double p = legendre(x, p_prev);
            const double dp = n * (x * p - p_prev) / (x * x - 1.0);
            const double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) {
                break;
            }
        }
        double p_prev = 0.0;
        const double p = legendre(x, p_prev);
        const double dp = n * (x * p - p_prev) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes_[i] = -x;
        nodes_[n - 1 - i] = x;
        weights_[i] = w;
        weights_[n - 1 - i] = w;
    }
    if (n % 2 == 1) {
        nodes_[half - 1] = 0.0;
    }
}

double GaussLegendre::integrate(const ScalarFunction& f, double a, double b,
                                std::span<const double> breakpoints, double max_panel) const
{
    if (!(b > a)) {
        return 0.0;
    }
    std::vector<double> cuts{a};
    for (double c : breakpoints) {
        if (c > a && c < b) {
            cuts.push_back(c);
        }
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());

    double total = 0.0;
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = cuts[s];
        const double hi = cuts[s + 1];
        if (!(hi > lo)) {
            continue;
        }
        const int panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / max_panel)));
        const double width = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = lo + (p + 0.5) * width;
            const double half = 0.5 * width;
            double acc = 0.0;
            for (Index k = 0; k < nodes_.size(); ++k) {
                acc += weights_[k] * f(mid + half * nodes_[k]);
            }
            total += half * acc;
        }
    }
    return total;
}

double gauss_expectation(const GaussLegendre& rule, const ScalarFunction& f, double sigma,
                         std::span<const double> breakpoints)
{
    if (!(sigma > 0.0)) {
        throw DomainError("gauss_expectation: sigma must be positive");
    }
    std::vector<double> z_breaks;
    z_breaks.reserve(breakpoints.size());
    for (double b : breakpoints) {
        z_breaks.push_back(b / sigma);
    }
    const auto integrand = [&](double z) { return f(sigma * z) * norm_pdf(z); };
    return rule.integrate(integrand, -kGaussianSpan, kGaussianSpan, z_breaks);
}

double gauss_expectation(const ScalarFunction& f, double sigma, int nodes,
                         std::span<const double> breakpoints)
{
    if (nodes < 16) {
        throw ConfigError("gauss_expectation: nodes must be >= 16, got " + std::to_string(nodes));
    }
    return gauss_expectation(GaussLegendre(nodes), f, sigma, breakpoints);
}

}  // namespace satrack
