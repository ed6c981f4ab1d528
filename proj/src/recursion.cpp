#include "satrack/recursion.hpp"

#include <cmath>

namespace satrack {

void validate(const RecursionConfig& cfg)
{
    if (!(cfg.gain >= 0.0) || !std::isfinite(cfg.gain)) {
        throw InputError("recursion: gain must be a finite non-negative number");
    }
    if (cfg.horizon < 1) {
        throw InputError("recursion: horizon must be at least 1");
    }
    if (cfg.domain.dimension() != cfg.theta0.size()) {
        throw InputError("recursion: domain and theta0 dimensions differ");
    }
    if (!cfg.domain.contains(cfg.theta0)) {
        throw InputError("recursion: theta0 lies outside the domain");
    }
}

FixedGainStepper::FixedGainStepper(const UpdateField& field, const RecursionConfig& cfg)
    : field_(&field), cfg_(&cfg), theta_(cfg.theta0), h_(cfg.theta0.size())
{
    if (field_dimension(field) != cfg.theta0.size()) {
        throw InputError("recursion: field dimension does not match theta0");
    }
}

void FixedGainStepper::step(double x)
{
    eval_field(*field_, theta_, x, h_);
    theta_ += cfg_->gain * h_;
    ++t_;
    if (cfg_->domain_policy == DomainPolicy::clamp) {
        theta_ = cfg_->domain.clamp(theta_);
    } else if (!exited_at_ && !cfg_->domain.contains(theta_)) {
        exited_at_ = t_;
    }
}

Trajectory run_fixed_gain(const UpdateField& field, const SignalPath& signal, const RecursionConfig& cfg)
{
    validate(cfg);
    if (signal.values.size() < cfg.horizon) {
        throw InputError("run_fixed_gain: signal is shorter than the horizon");
    }
    FixedGainStepper stepper(field, cfg);
    Trajectory traj;
    traj.points.resize(cfg.theta0.size(), static_cast<Index>(cfg.horizon) + 1);
    traj.points.col(0) = cfg.theta0;
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
        stepper.step(signal.values[t]);
        traj.points.col(static_cast<Index>(t) + 1) = stepper.theta();
    }
    traj.exited_domain_at = stepper.exited_at();
    return traj;
}

Trajectory run_averaged(const MeanField& mf, const RecursionConfig& cfg)
{
    Trajectory traj = run_averaged(mean_field_fn(mf), cfg);
    traj.approximate_mean_field = std::holds_alternative<MonteCarlo>(mf);
    return traj;
}

std::size_t t0_threshold(double gain, double c_log)
{
    if (!(gain > 0.0 && gain < 1.0)) {
        throw DomainError("t0_threshold: gain must lie in (0, 1)");
    }
    if (!(c_log > 0.0)) {
        throw DomainError("t0_threshold: c_log must be positive");
    }
    return static_cast<std::size_t>(std::ceil(c_log * std::log(1.0 / gain) / gain));
}

}  // namespace satrack
