#ifndef SATRACK_RECURSION_HPP
#define SATRACK_RECURSION_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <optional>
#include <string>

#include "satrack/errors.hpp"
#include "satrack/fields.hpp"
#include "satrack/signals.hpp"
#include "satrack/types.hpp"

namespace satrack {

enum class DomainPolicy { none, clamp };

struct RecursionConfig {
    Vector theta0;
    double gain = 0.0;         // lambda >= 0
    std::size_t horizon = 1;   // T
    Box domain;
    DomainPolicy domain_policy = DomainPolicy::none;
};

void validate(const RecursionConfig& cfg);

struct Trajectory {
    Eigen::MatrixXd points;  // N x (T + 1), column t is theta_t
    std::optional<std::size_t> exited_domain_at;
    bool approximate_mean_field = false;

    std::size_t horizon() const { return static_cast<std::size_t>(points.cols()) - 1; }
    Vector at(std::size_t t) const { return points.col(static_cast<Index>(t)); }
};

/**
 * One fixed-gain step at a time: theta <- theta + gain * H(theta, x).
 * Under DomainPolicy::none the first exit from the box is recorded and the
 * iteration continues unclamped.
 */
class FixedGainStepper {
  public:
    FixedGainStepper(const UpdateField& field, const RecursionConfig& cfg);

    void step(double x);
    const Vector& theta() const { return theta_; }
    std::size_t time() const { return t_; }
    const std::optional<std::size_t>& exited_at() const { return exited_at_; }

  private:
    const UpdateField* field_;
    const RecursionConfig* cfg_;
    Vector theta_;
    Vector h_;
    std::size_t t_ = 0;
    std::optional<std::size_t> exited_at_;
};

/// theta_{t+1} = theta_t + lambda H(theta_t, X_{t+1}) driven by signal.values[t].
Trajectory run_fixed_gain(const UpdateField& field, const SignalPath& signal, const RecursionConfig& cfg);

/// z_{t+1} = z_t + lambda G(z_t), z_0 = theta0, for any callable G.
template <typename MeanFieldFn>
    requires std::invocable<MeanFieldFn&, const Vector&>
Trajectory run_averaged(MeanFieldFn&& G, const RecursionConfig& cfg)
{
    validate(cfg);
    Trajectory traj;
    traj.points.resize(cfg.theta0.size(), static_cast<Index>(cfg.horizon) + 1);
    Vector z = cfg.theta0;
    traj.points.col(0) = z;
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
        z += cfg.gain * G(z);
        if (cfg.domain_policy == DomainPolicy::clamp) {
            z = cfg.domain.clamp(z);
        } else if (!traj.exited_domain_at && !cfg.domain.contains(z)) {
            traj.exited_domain_at = t + 1;
        }
        traj.points.col(static_cast<Index>(t) + 1) = z;
    }
    return traj;
}

/// Averaged iteration for a MeanField; flags Monte Carlo mean fields as approximate.
Trajectory run_averaged(const MeanField& mf, const RecursionConfig& cfg);

/// z(n, m, xi): n - m steps of z <- z + lambda G(z) from xi.
template <typename MeanFieldFn, typename Derived>
Vector discrete_flow(MeanFieldFn&& G, std::size_t n, std::size_t m, const Eigen::MatrixBase<Derived>& xi,
                     double gain)
{
    if (m > n) {
        throw InputError("discrete_flow: need m <= n");
    }
    Vector z = xi;
    for (std::size_t k = m; k < n; ++k) {
        z += gain * G(z);
    }
    return z;
}

/// Default ODE step in flow time: keeps lambda * step <= 0.1.
inline double default_ode_step(double gain) { return std::min(0.1, 0.1 / gain); }

/// y(t, s, xi) for dy/dt = lambda G(y), classical fixed-step RK4 with a
/// shortened final step.
template <typename MeanFieldFn, typename Derived>
Vector ode_flow(MeanFieldFn&& G, double t, double s, const Eigen::MatrixBase<Derived>& xi, double gain,
                double step)
{
    if (!(s <= t)) {
        throw InputError("ode_flow: need s <= t");
    }
    if (!(step > 0.0)) {
        throw InputError("ode_flow: step must be positive");
    }
    Vector y = xi;
    double now = s;
    while (now < t) {
        const double h = std::min(step, t - now);
        const Vector k1 = gain * G(y);
        const Vector k2 = gain * G(Vector(y + 0.5 * h * k1));
        const Vector k3 = gain * G(Vector(y + 0.5 * h * k2));
        const Vector k4 = gain * G(Vector(y + h * k3));
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        // Snap to t when the remaining interval is only rounding residue.
        now = (t - (now + h) <= 1e-12 * std::max(1.0, std::abs(t))) ? t : now + h;
    }
    return y;
}

/**
 * Operator norm of d z(n, m, xi) / d xi by central differences with
 * coordinate bumps. Throws InputError if a bump leaves the domain.
 */
template <typename MeanFieldFn>
double flow_sensitivity(MeanFieldFn&& G, std::size_t n, std::size_t m, const Vector& xi, double gain,
                        double bump, const Box& domain)
{
    if (!(bump > 0.0)) {
        throw InputError("flow_sensitivity: bump must be positive");
    }
    const Index dim = xi.size();
    Eigen::MatrixXd jac(dim, dim);
    for (Index j = 0; j < dim; ++j) {
        Vector up = xi;
        Vector down = xi;
        up[j] += bump;
        down[j] -= bump;
        if (!domain.contains(up) || !domain.contains(down)) {
            throw InputError("flow_sensitivity: bump pushes xi outside the domain");
        }
        jac.col(j) = (discrete_flow(G, n, m, up, gain) - discrete_flow(G, n, m, down, gain)) / (2.0 * bump);
    }
    if (dim == 1) {
        return std::abs(jac(0, 0));
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    return svd.singularValues()[0];
}

/// Default bump: 1e-5 times the domain diameter.
inline double default_bump(const Box& domain) { return 1e-5 * domain.diameter(); }

/// ceil(c_log ln(1/lambda) / lambda): transient length after which the
/// tracking error is of order sqrt(lambda).
std::size_t t0_threshold(double gain, double c_log);

}  // namespace satrack

#endif  // SATRACK_RECURSION_HPP
