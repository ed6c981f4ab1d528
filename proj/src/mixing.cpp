#include "satrack/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "satrack/errors.hpp"
#include "satrack/normal.hpp"
#include "satrack/parallel.hpp"
#include "satrack/quadrature.hpp"

namespace satrack {

namespace {

constexpr std::size_t kChunk = 4096;

double power_beta(const LinearProcessSpec& spec)
{
    return std::get<PowerDecay>(spec.rule).beta;
}

bool is_power_decay(const LinearProcessSpec& spec) { return std::holds_alternative<PowerDecay>(spec.rule); }

double mean_of(std::vector<double>& values)
{
    return pairwise_sum(values) / static_cast<double>(values.size());
}

// Sample mean and standard error of a vector of per-item values.
std::pair<double, double> mean_and_stderr(std::vector<double> values)
{
    const double n = static_cast<double>(values.size());
    const double mean = mean_of(values);
    for (double& v : values) {
        v = (v - mean) * (v - mean);
    }
    const double var = values.size() > 1 ? pairwise_sum(values) / (n - 1.0) : 0.0;
    return {mean, std::sqrt(var / n)};
}

// Nonzero finite breakpoints of both parameters, shifted by -shift.
std::vector<double> shifted_breaks(const UpdateField& field, const Vector& t1, const Vector* t2, double shift)
{
    std::vector<double> out;
    auto add = [&](const Vector& t) {
        for (double b : field_breakpoints(field, t)) {
            if (std::isfinite(b)) {
                out.push_back(b - shift);
            }
        }
    };
    add(t1);
    if (t2) {
        add(*t2);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

double gaussian_abs_moment(double r)
{
    if (!(r >= 1.0)) {
        throw DomainError("moment order r must be at least 1");
    }
    const double log_moment = 0.5 * r * std::log(2.0) + std::lgamma(0.5 * (r + 1.0)) - 0.5 * std::log(std::numbers::pi);
    return std::exp(log_moment / r);
}

double gamma_exact_linear(const LinearProcessSpec& spec, std::size_t tau)
{
    if (tau < 1) {
        throw InputError("gamma_exact_linear: tau must be at least 1");
    }
    return std::sqrt(std::max(0.0, tail_variance(spec, tau)));
}

double gamma_bound_linear(const LinearProcessSpec& spec, double r, std::size_t tau)
{
    if (!is_power_decay(spec)) {
        throw InputError("gamma_bound_linear: needs a power-decay coefficient rule");
    }
    const double beta = power_beta(spec);
    if (!(beta > 1.0)) {
        throw DomainError("gamma_bound_linear: bound is void for beta <= 1");
    }
    if (tau < 1) {
        throw InputError("gamma_bound_linear: tau must be at least 1");
    }
    const double c3 = 1.0 / (beta - 1.0);
    return c3 * gaussian_abs_moment(r) * std::pow(static_cast<double>(tau), 1.0 - beta);
}

MixingProfile gamma_total(const LinearProcessSpec& spec, double r, std::size_t tau_max)
{
    validate(spec);
    if (tau_max < 1) {
        throw InputError("gamma_total: tau_max must be at least 1");
    }
    const double mz = gaussian_abs_moment(r);
    const double T = static_cast<double>(tau_max);

    MixingProfile prof;
    prof.order_r = r;
    prof.m_r = mz * std::sqrt(stationary_variance(spec));
    prof.gamma_sequence.resize(tau_max);

    if (is_power_decay(spec)) {
        const double beta = power_beta(spec);
        if (!(beta > 2.0)) {
            throw DomainError("gamma_total: Gamma_r diverges for power decay with beta <= 2");
        }
        if (r != 2.0) {
            prof.exact = false;
            for (std::size_t tau = 1; tau <= tau_max; ++tau) {
                prof.gamma_sequence[tau - 1] = gamma_bound_linear(spec, r, tau);
            }
            prof.tail_bound = mz / (beta - 1.0) * std::pow(T, 2.0 - beta) / (beta - 2.0);
        } else {
            for (std::size_t tau = 1; tau <= tau_max; ++tau) {
                prof.gamma_sequence[tau - 1] = gamma_exact_linear(spec, tau);
            }
            // gamma_2(tau)^2 <= tau^(1 - 2 beta) / (2 beta - 1), then integral comparison.
            prof.tail_bound = std::pow(T, 1.5 - beta) / ((beta - 1.5) * std::sqrt(2.0 * beta - 1.0));
        }
    } else {
        // Gaussian tails: the L^r deviation is |Z|_r times the L^2 one.
        for (std::size_t tau = 1; tau <= tau_max; ++tau) {
            prof.gamma_sequence[tau - 1] = mz * gamma_exact_linear(spec, tau);
        }
        if (const auto* g = std::get_if<Geometric>(&spec.rule)) {
            const double a = std::abs(g->alpha);
            prof.tail_bound = a == 0.0 ? 0.0
                                       : mz * std::pow(a, T + 1.0) / ((1.0 - a) * std::sqrt(1.0 - a * a));
        } else {
            const std::size_t len = std::get<Finite>(spec.rule).coefficients.size();
            for (std::size_t tau = tau_max + 1; tau < len; ++tau) {
                prof.tail_bound += mz * gamma_exact_linear(spec, tau);
            }
        }
    }
    for (double g : prof.gamma_sequence) {
        prof.gamma_total += g;
    }
    return prof;
}

CouplingEstimate gamma_coupling_estimate(const LinearProcessSpec& spec, std::size_t tau, std::size_t trials,
                                         RngState rng, unsigned workers)
{
    validate(spec);
    if (tau < 1) {
        throw InputError("gamma_coupling_estimate: tau must be at least 1");
    }
    if (trials < 2) {
        throw ConfigError("gamma_coupling_estimate: need at least 2 trials");
    }
    const auto plan = make_plan(spec);
    const auto* geo = std::get_if<Geometric>(&spec.rule);
    const double sd0 = std::sqrt(plan->variance);
    const std::size_t L = plan->window();
    const double lump_sd = std::sqrt(tail_variance(spec, std::max(tau, L)));

    std::vector<double> half_sq(trials);
    const std::size_t chunks = (trials + kChunk - 1) / kChunk;
    parallel_for(chunks, resolve_workers(workers), [&](std::size_t c) {
        RngState r = rng.derive(c);
        const std::size_t end = std::min(trials, (c + 1) * kChunk);
        for (std::size_t i = c * kChunk; i < end; ++i) {
            double y1 = 0.0;
            double y2 = 0.0;
            if (geo) {
                // Independent stationary pasts, then tau shared AR steps.
                y1 = sd0 * next_gaussian(r);
                y2 = sd0 * next_gaussian(r);
                for (std::size_t s = 0; s < tau; ++s) {
                    const double e = next_gaussian(r);
                    y1 = geo->alpha * y1 + e;
                    y2 = geo->alpha * y2 + e;
                }
            } else {
                for (std::size_t j = 0; j < L; ++j) {
                    const double a = plan->coefficients[j];
                    if (j < tau) {
                        const double e = next_gaussian(r);
                        y1 += a * e;
                        y2 += a * e;
                    } else {
                        y1 += a * next_gaussian(r);
                        y2 += a * next_gaussian(r);
                    }
                }
                if (lump_sd > 0.0) {
                    y1 += lump_sd * next_gaussian(r);
                    y2 += lump_sd * next_gaussian(r);
                }
            }
            half_sq[i] = 0.5 * (y1 - y2) * (y1 - y2);
        }
    });

    const auto [mean, se] = mean_and_stderr(std::move(half_sq));
    CouplingEstimate out;
    out.estimate = std::sqrt(mean);
    out.stderr_ = out.estimate > 0.0 ? se / (2.0 * out.estimate) : 0.0;
    return out;
}

ClcReport estimate_clc(const UpdateField& field, const LinearProcessSpec& spec, const Box& domain,
                       std::size_t pair_count, std::size_t mc_samples, RngState rng, unsigned workers)
{
    validate(field);
    validate(spec);
    const Index dim = field_dimension(field);
    if (domain.dimension() != dim) {
        throw InputError("estimate_clc: domain dimension does not match the field");
    }
    if (!domain.lower.allFinite() || !domain.upper.allFinite()) {
        throw ConfigError("estimate_clc: pairs are drawn from the domain, which must be bounded");
    }
    if (pair_count < 1 || mc_samples < 1) {
        throw ConfigError("estimate_clc: pair_count and mc_samples must be positive");
    }

    const double a0 = std::abs(spec.coefficient(0));
    const double past_sd = std::sqrt(tail_variance(spec, 1));
    std::vector<double> history(mc_samples);
    {
        RngState r = rng.derive(0);
        for (double& m : history) {
            m = past_sd * next_gaussian(r);
        }
    }

    const auto* pinball = std::get_if<QuantilePinball>(&field);
    const GaussLegendre rule(16);

    // E[|H(t1, X) - H(t2, X)|] for X = m + a0 eps.
    auto conditional_gap = [&](const Vector& t1, const Vector& t2, double m) {
        if (a0 == 0.0) {
            return (eval_field(field, t1, m) - eval_field(field, t2, m)).norm();
        }
        if (pinball) {
            return std::abs(norm_cdf((t2[0] - m) / a0) - norm_cdf((t1[0] - m) / a0));
        }
        const std::vector<double> breaks = shifted_breaks(field, t1, &t2, m);
        Vector h1(dim);
        Vector h2(dim);
        return gauss_expectation(
            rule,
            [&](double e) {
                eval_field(field, t1, m + e, h1);
                eval_field(field, t2, m + e, h2);
                return (h1 - h2).norm();
            },
            a0, breaks);
    };

    struct PairResult {
        bool skipped = false;
        double max_ratio = 0.0;
        double mean_ratio = 0.0;
        Vector t1;
        Vector t2;
    };
    std::vector<PairResult> results(pair_count);
    const double diam = domain.diameter();

    parallel_for(pair_count, resolve_workers(workers), [&](std::size_t i) {
        RngState r = rng.derive(i + 1);
        PairResult& res = results[i];
        res.t1.resize(dim);
        Vector dir(dim);
        for (Index k = 0; k < dim; ++k) {
            res.t1[k] = domain.lower[k] + (domain.upper[k] - domain.lower[k]) * r.next_uniform();
        }
        for (Index k = 0; k < dim; ++k) {
            dir[k] = next_gaussian(r);
        }
        const double scale = diam * std::pow(10.0, -6.0 * r.next_uniform());
        res.t2 = domain.clamp(Vector(res.t1 + scale * dir.normalized()));
        const double dist = (res.t1 - res.t2).norm();
        if (dist < 1e-12) {
            res.skipped = true;
            return;
        }
        std::vector<double> ratios(mc_samples);
        for (std::size_t h = 0; h < mc_samples; ++h) {
            ratios[h] = conditional_gap(res.t1, res.t2, history[h]) / dist;
        }
        res.max_ratio = *std::max_element(ratios.begin(), ratios.end());
        res.mean_ratio = mean_of(ratios);
    });

    ClcReport rep;
    bool have_worst = false;
    for (const PairResult& res : results) {
        if (res.skipped) {
            ++rep.pairs_skipped;
            continue;
        }
        ++rep.pairs_tested;
        rep.mean_ratio = std::max(rep.mean_ratio, res.mean_ratio);
        if (!have_worst || res.max_ratio > rep.k_hat) {
            rep.k_hat = res.max_ratio;
            rep.worst_pair = {res.t1, res.t2};
            have_worst = true;
        }
    }
    return rep;
}

ForgettingReport forgetting_partial_sum(const UpdateField& field, const LinearProcessSpec& spec,
                                        std::size_t k_max, const std::vector<Vector>& theta_grid,
                                        std::size_t mc_histories, RngState rng, unsigned workers)
{
    validate(field);
    validate(spec);
    if (theta_grid.empty()) {
        throw ConfigError("forgetting_partial_sum: theta grid is empty");
    }
    if (mc_histories < 1) {
        throw ConfigError("forgetting_partial_sum: need at least one history");
    }
    const Index dim = field_dimension(field);
    for (const Vector& t : theta_grid) {
        if (t.size() != dim) {
            throw InputError("forgetting_partial_sum: grid point dimension does not match the field");
        }
    }

    const double var = stationary_variance(spec);
    std::vector<double> z(mc_histories);
    {
        RngState r = rng.derive(0);
        for (double& v : z) {
            v = next_gaussian(r);
        }
    }

    const auto* pinball = std::get_if<QuantilePinball>(&field);
    const MeanField mf = ClosedForm{field, spec};
    std::vector<Vector> g_grid;
    g_grid.reserve(theta_grid.size());
    for (const Vector& t : theta_grid) {
        if (pinball) {
            g_grid.push_back(Vector::Constant(1, pinball->q - norm_cdf(t[0] / std::sqrt(var))));
        } else {
            g_grid.push_back(mean_field(mf, t));
        }
    }
    const GaussLegendre rule(16);

    // E[H(theta, X)] for X ~ N(m, s^2).
    auto conditional_mean = [&](const Vector& theta, double m, double s) -> Vector {
        if (s == 0.0) {
            return eval_field(field, theta, m);
        }
        if (pinball) {
            return Vector::Constant(1, pinball->q - norm_cdf((theta[0] - m) / s));
        }
        const std::vector<double> breaks = shifted_breaks(field, theta, nullptr, m);
        Vector out(dim);
        Vector h(dim);
        for (Index c = 0; c < dim; ++c) {
            out[c] = gauss_expectation(
                rule,
                [&](double e) {
                    eval_field(field, theta, m + e, h);
                    return h[c];
                },
                s, breaks);
        }
        return out;
    };

    ForgettingReport rep;
    rep.k_max = k_max;
    rep.theta_grid_size = theta_grid.size();
    rep.terms.assign(k_max + 1, 0.0);
    parallel_for(k_max + 1, resolve_workers(workers), [&](std::size_t k) {
        const double tv = tail_variance(spec, k + 1);
        const double past_sd = std::sqrt(tv);
        const double s = std::sqrt(std::max(0.0, var - tv));
        double sup = 0.0;
        std::vector<double> devs(mc_histories);
        for (std::size_t g = 0; g < theta_grid.size(); ++g) {
            for (std::size_t h = 0; h < mc_histories; ++h) {
                devs[h] = (conditional_mean(theta_grid[g], past_sd * z[h], s) - g_grid[g]).norm();
            }
            sup = std::max(sup, mean_of(devs));
        }
        rep.terms[k] = sup;
    });
    rep.partial_sums.resize(k_max + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= k_max; ++k) {
        acc += rep.terms[k];
        rep.partial_sums[k] = acc;
    }
    return rep;
}

MaximalInequalityReport check_maximal_inequality(const LinearProcessSpec& spec, const UpdateField& field,
                                                 const Vector& theta, double r,
                                                 const std::vector<std::size_t>& blocks, std::size_t trials,
                                                 RngState rng, double weight, unsigned workers)
{
    if (!(r > 2.0)) {
        throw DomainError("check_maximal_inequality: needs r > 2");
    }
    validate(spec);
    validate(field);
    if (blocks.empty() || *std::min_element(blocks.begin(), blocks.end()) < 1) {
        throw ConfigError("check_maximal_inequality: block sizes must be positive");
    }
    if (trials < 2) {
        throw ConfigError("check_maximal_inequality: need at least 2 trials");
    }
    if (theta.size() != field_dimension(field)) {
        throw InputError("check_maximal_inequality: theta dimension does not match the field");
    }

    const SignalSpec signal = spec;
    Vector center;
    if (has_closed_form(field, signal)) {
        center = mean_field(ClosedForm{field, signal}, theta);
    } else {
        center = mean_field(MonteCarlo{field, signal, std::size_t{1} << 20, rng.derive(~0ULL)}, theta);
    }

    const std::size_t m_max = *std::max_element(blocks.begin(), blocks.end());
    const std::size_t nb = blocks.size();
    std::vector<double> sup_r(trials * nb);
    std::vector<double> w_r(trials);
    const auto plan = make_plan(spec);

    parallel_for(trials, resolve_workers(workers), [&](std::size_t i) {
        SignalSource src(signal, plan, rng.derive(i));
        Vector sum = Vector::Zero(theta.size());
        Vector w(theta.size());
        std::vector<double> sup_at(m_max + 1, 0.0);
        double sup = 0.0;
        double acc = 0.0;
        for (std::size_t t = 1; t <= m_max; ++t) {
            eval_field(field, theta, src.next(), w);
            w -= center;
            acc += std::pow(w.norm(), r);
            sum += weight * w;
            sup = std::max(sup, sum.norm());
            sup_at[t] = sup;
        }
        for (std::size_t b = 0; b < nb; ++b) {
            sup_r[i * nb + b] = std::pow(sup_at[blocks[b]], r);
        }
        w_r[i] = acc / static_cast<double>(m_max);
    });

    MaximalInequalityReport rep;
    rep.order_r = r;
    rep.m_hat = std::pow(mean_of(w_r), 1.0 / r);
    rep.gamma_hat = gamma_total(spec, r, 256).gamma_total;
    if (!(rep.gamma_hat > 0.0) || !(rep.m_hat > 0.0)) {
        throw InputError("check_maximal_inequality: degenerate normalizer (M or Gamma is zero)");
    }
    const double scale = std::sqrt(rep.m_hat * rep.gamma_hat);
    std::vector<double> column(trials);
    std::vector<std::pair<double, double>> pts;
    for (std::size_t b = 0; b < nb; ++b) {
        for (std::size_t i = 0; i < trials; ++i) {
            column[i] = sup_r[i * nb + b];
        }
        MaximalRow row;
        row.block = blocks[b];
        row.moment = std::pow(mean_of(column), 1.0 / r);
        row.ratio = row.moment / (std::sqrt(static_cast<double>(row.block)) * scale);
        rep.rows.push_back(row);
        pts.emplace_back(std::log2(static_cast<double>(row.block)), std::log2(row.ratio));
    }
    const bool distinct = std::any_of(blocks.begin(), blocks.end(), [&](std::size_t m) { return m != blocks[0]; });
    if (distinct) {
        rep.trend = fit_line(pts);
    }
    return rep;
}

}  // namespace satrack
