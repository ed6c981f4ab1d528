#include "satrack/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "satrack/errors.hpp"
#include "satrack/fixed_point.hpp"
#include "satrack/normal.hpp"
#include "satrack/parallel.hpp"

namespace satrack {

namespace {

struct Summary {
    double mean = 0.0;
    double stderr_ = 0.0;
};

Summary summarize(std::vector<double> values)
{
    const double n = static_cast<double>(values.size());
    Summary s;
    s.mean = pairwise_sum(values) / n;
    for (double& v : values) {
        v = (v - s.mean) * (v - s.mean);
    }
    s.stderr_ = values.size() > 1 ? std::sqrt(pairwise_sum(values) / (n - 1.0) / n) : 0.0;
    return s;
}

// Iterates at the requested sample times, path-major: samples[p * times.size() + k].
struct Ensemble {
    std::vector<Vector> samples;
    std::vector<char> exited;
    std::size_t exits = 0;
};

Ensemble simulate(const ExperimentConfig& cfg, double gain, std::uint64_t lane,
                  const std::vector<std::size_t>& times, unsigned workers)
{
    RecursionConfig rc;
    rc.theta0 = cfg.theta0;
    rc.gain = gain;
    rc.horizon = std::max<std::size_t>(1, times.back());
    rc.domain = cfg.domain;
    rc.domain_policy = cfg.domain_policy;
    validate(rc);

    const LinearProcessSpec* lin = linear_part(cfg.signal);
    const auto plan = lin ? make_plan(*lin) : nullptr;
    const std::size_t ns = times.size();

    Ensemble ens;
    ens.samples.resize(cfg.paths * ns);
    ens.exited.assign(cfg.paths, 0);
    parallel_for(cfg.paths, resolve_workers(workers), [&](std::size_t p) {
        SignalSource src(cfg.signal, plan, path_stream(cfg.base_seed, lane, p));
        FixedGainStepper stepper(cfg.field, rc);
        std::size_t k = 0;
        while (k < ns && times[k] == 0) {
            ens.samples[p * ns + k++] = stepper.theta();
        }
        for (std::size_t t = 1; k < ns; ++t) {
            stepper.step(src.next());
            while (k < ns && times[k] == t) {
                ens.samples[p * ns + k++] = stepper.theta();
            }
        }
        ens.exited[p] = stepper.exited_at().has_value() ? 1 : 0;
    });
    for (char e : ens.exited) {
        ens.exits += static_cast<std::size_t>(e);
    }
    return ens;
}

void check_exits(const ExperimentConfig& cfg, double gain, std::size_t exits)
{
    if (exits * 100 > cfg.paths) {
        std::ostringstream msg;
        msg << "experiment '" << cfg.name << "': " << exits << " of " << cfg.paths
            << " paths left the domain at lambda = " << gain << " (more than 1%)";
        throw DomainExitError(msg.str());
    }
}

double sup_norm(const Vector& v) { return v.cwiseAbs().maxCoeff(); }

ReferenceValue analytic_reference(const ExperimentConfig& cfg)
{
    ReferenceValue ref;
    ref.stderr_ = Vector::Zero(cfg.theta0.size());
    if (!has_closed_form(cfg.field, cfg.signal)) {
        throw ConfigError("experiment '" + cfg.name +
                          "': no analytic reference for this signal; use a self-referential reference");
    }
    const MeanField mf = ClosedForm{cfg.field, cfg.signal};

    if (const auto* pin = std::get_if<QuantilePinball>(&cfg.field)) {
        double theta = 0.0;
        if (const auto* lin = std::get_if<LinearProcessSpec>(&cfg.signal)) {
            theta = norm_quantile(pin->q) * std::sqrt(stationary_variance(*lin));
        } else if (const auto* at = std::get_if<ArctanLinear>(&cfg.signal)) {
            theta = std::atan(norm_quantile(pin->q) * std::sqrt(stationary_variance(at->inner)));
        } else {
            theta = pin->q;  // uniform
        }
        ref.theta = Vector::Constant(1, theta);
        ref.method = "closed_form_quantile";
    } else if (cfg.theta0.size() == 2) {
        const auto G = mean_field_fn(mf);
        const FixedPointResult fp = solve_fixed_point_2d(
            [&](const Eigen::Vector2d& t) -> Eigen::Vector2d { return -G(Vector(t)); }, cfg.theta0, 1e-13, 100000);
        ref.theta = fp.root;
        ref.iterations = fp.iterations;
        ref.method = "fixed_point_2d";
    } else {
        throw ConfigError("experiment '" + cfg.name + "': analytic reference needs a pinball field or N = 2");
    }
    ref.residual = sup_norm(mean_field(mf, ref.theta));
    return ref;
}

ReferenceValue self_referential(const ExperimentConfig& cfg, double lambda_ref, unsigned workers)
{
    const std::size_t T = horizon_for(cfg.horizon, lambda_ref);
    const Ensemble ens = simulate(cfg, lambda_ref, kReferenceLane, {T}, workers);
    check_exits(cfg, lambda_ref, ens.exits);

    const Index dim = cfg.theta0.size();
    ReferenceValue ref;
    ref.theta.resize(dim);
    ref.stderr_.resize(dim);
    std::vector<double> coord(cfg.paths);
    for (Index c = 0; c < dim; ++c) {
        for (std::size_t p = 0; p < cfg.paths; ++p) {
            coord[p] = ens.samples[p][c];
        }
        const Summary s = summarize(coord);
        ref.theta[c] = s.mean;
        ref.stderr_[c] = s.stderr_;
    }
    if (has_closed_form(cfg.field, cfg.signal)) {
        ref.residual = sup_norm(mean_field(ClosedForm{cfg.field, cfg.signal}, ref.theta));
    }
    ref.method = "self_referential";
    return ref;
}

}  // namespace

std::size_t horizon_for(const HorizonRule& rule, double gain)
{
    if (const auto* f = std::get_if<FixedHorizon>(&rule)) {
        return f->steps;
    }
    if (!(gain > 0.0)) {
        throw DomainError("per-gain horizon needs a positive gain");
    }
    return static_cast<std::size_t>(std::ceil(std::get<PerGain>(rule).c / gain));
}

void validate(const ExperimentConfig& cfg)
{
    if (cfg.name.empty() || !std::all_of(cfg.name.begin(), cfg.name.end(), [](char ch) {
            return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-';
        })) {
        throw ValidationError("name", "name must be non-empty and use only letters, digits, '_' or '-'");
    }
    try {
        validate(cfg.signal);
    } catch (const Error& e) {
        throw ValidationError("signal", std::string("signal: ") + e.what());
    }
    try {
        validate(cfg.field);
    } catch (const Error& e) {
        throw ValidationError("field", std::string("field: ") + e.what());
    }
    if (cfg.theta0.size() != field_dimension(cfg.field)) {
        throw ValidationError("theta0", "theta0 length does not match the field dimension");
    }
    if (!cfg.theta0.allFinite()) {
        throw ValidationError("theta0", "theta0 must be finite");
    }
    if (cfg.domain.dimension() != cfg.theta0.size()) {
        throw ValidationError("domain", "domain dimension does not match theta0");
    }
    if ((cfg.domain.lower.array() > cfg.domain.upper.array()).any()) {
        throw ValidationError("domain", "domain lower bound exceeds upper bound");
    }
    if (!cfg.domain.contains(cfg.theta0)) {
        throw ValidationError("theta0", "theta0 lies outside the domain");
    }
    if (cfg.lambda_grid.empty()) {
        throw ValidationError("lambda_grid", "lambda_grid must not be empty");
    }
    for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
        const double g = cfg.lambda_grid[i];
        if (!(g > 0.0 && g < 1.0)) {
            throw ValidationError("lambda_grid", "lambda_grid entries must lie in (0, 1)");
        }
        if (i > 0 && !(g < cfg.lambda_grid[i - 1])) {
            throw ValidationError("lambda_grid", "lambda_grid must be strictly decreasing");
        }
    }
    if (const auto* f = std::get_if<FixedHorizon>(&cfg.horizon)) {
        if (f->steps < 1) {
            throw ValidationError("horizon", "fixed horizon must be at least 1");
        }
    } else {
        const double c = std::get<PerGain>(cfg.horizon).c;
        if (!(c > 0.0) || !std::isfinite(c)) {
            throw ValidationError("horizon", "per-gain horizon constant must be positive");
        }
    }
    if (cfg.paths < 2) {
        throw ValidationError("paths", "paths must be at least 2");
    }
    if (const auto* sr = std::get_if<SelfReferential>(&cfg.reference)) {
        if (!(sr->lambda_ref > 0.0 && sr->lambda_ref < cfg.lambda_grid.back())) {
            throw ValidationError("reference", "lambda_ref must be positive and below every lambda_grid entry");
        }
    }
}

ReferenceValue reference_value(const ExperimentConfig& cfg, unsigned workers)
{
    validate(cfg);
    if (const auto* sr = std::get_if<SelfReferential>(&cfg.reference)) {
        return self_referential(cfg, sr->lambda_ref, workers);
    }
    return analytic_reference(cfg);
}

LineFit rate_fit(const ErrorCurve& curve)
{
    std::vector<std::pair<double, double>> pts;
    for (const CurveRow& r : curve.rows) {
        pts.emplace_back(std::log2(r.lambda), std::log2(r.mean_abs_error));
    }
    return fit_line(pts);
}

ErrorCurve run_error_curve(const ExperimentConfig& cfg, unsigned workers)
{
    return run_error_curve(cfg, reference_value(cfg, workers), workers);
}

ErrorCurve run_error_curve(const ExperimentConfig& cfg, const ReferenceValue& reference, unsigned workers)
{
    validate(cfg);
    if (reference.theta.size() != cfg.theta0.size()) {
        throw InputError("run_error_curve: reference dimension does not match theta0");
    }
    ErrorCurve curve;
    curve.reference = reference;
    const Index dim = cfg.theta0.size();
    std::vector<double> values(cfg.paths);

    for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
        const double gain = cfg.lambda_grid[i];
        CurveRow row;
        row.lambda = gain;
        row.horizon = horizon_for(cfg.horizon, gain);
        row.paths = cfg.paths;
        const Ensemble ens = simulate(cfg, gain, i, {row.horizon}, workers);
        check_exits(cfg, gain, ens.exits);
        row.exits = ens.exits;

        for (std::size_t p = 0; p < cfg.paths; ++p) {
            values[p] = (ens.samples[p] - reference.theta).norm();
        }
        const Summary err = summarize(values);
        row.mean_abs_error = err.mean;
        row.stderr_ = err.stderr_;

        row.mean_theta.resize(dim);
        row.theta_stderr.resize(dim);
        for (Index c = 0; c < dim; ++c) {
            for (std::size_t p = 0; p < cfg.paths; ++p) {
                values[p] = ens.samples[p][c];
            }
            const Summary s = summarize(values);
            row.mean_theta[c] = s.mean;
            row.theta_stderr[c] = s.stderr_;
        }
        curve.rows.push_back(std::move(row));
    }
    if (curve.rows.size() >= 2) {
        curve.slope_fit = rate_fit(curve);
    }
    return curve;
}

GapCurve tracking_gap(const ExperimentConfig& cfg, double gain, std::uint64_t lambda_index,
                      const std::vector<std::size_t>& sample_times, unsigned workers)
{
    validate(cfg);
    if (sample_times.empty()) {
        throw ConfigError("tracking_gap: no sample times");
    }
    if (!has_closed_form(cfg.field, cfg.signal)) {
        throw ConfigError("tracking_gap: needs an exact mean field for the averaged iteration");
    }
    std::vector<std::size_t> times = sample_times;
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());

    RecursionConfig rc;
    rc.theta0 = cfg.theta0;
    rc.gain = gain;
    rc.horizon = std::max<std::size_t>(1, times.back());
    rc.domain = cfg.domain;
    rc.domain_policy = cfg.domain_policy;
    const Trajectory z = run_averaged(MeanField{ClosedForm{cfg.field, cfg.signal}}, rc);

    const Ensemble ens = simulate(cfg, gain, lambda_index, times, workers);
    check_exits(cfg, gain, ens.exits);

    GapCurve curve;
    curve.lambda = gain;
    curve.exits = ens.exits;
    const std::size_t ns = times.size();
    std::vector<double> gaps(cfg.paths);
    for (std::size_t k = 0; k < ns; ++k) {
        const Vector zt = z.at(times[k]);
        for (std::size_t p = 0; p < cfg.paths; ++p) {
            gaps[p] = (ens.samples[p * ns + k] - zt).norm();
        }
        const Summary s = summarize(gaps);
        curve.rows.push_back({times[k], s.mean, s.stderr_});
        curve.max_gap = std::max(curve.max_gap, s.mean);
    }
    return curve;
}

TrackingGapReport tracking_gap_curve(const ExperimentConfig& cfg, const std::vector<std::size_t>& sample_times,
                                     unsigned workers)
{
    TrackingGapReport rep;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < cfg.lambda_grid.size(); ++i) {
        rep.curves.push_back(tracking_gap(cfg, cfg.lambda_grid[i], i, sample_times, workers));
        pts.emplace_back(std::log2(cfg.lambda_grid[i]), std::log2(rep.curves.back().max_gap));
    }
    if (pts.size() >= 2) {
        rep.slope_fit = fit_line(pts);
    }
    return rep;
}

}  // namespace satrack
