#include "satrack/signals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "satrack/errors.hpp"
#include "satrack/normal.hpp"

namespace satrack {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kLumpThreshold = 1e-12;
constexpr std::size_t kMaxWindow = 65536;
constexpr double kExplicitLimit = 1e6;

// sum_{k >= k0} k^(-s), s > 1. Terms are added explicitly (smallest first)
// until they fall below 1e-20 or k reaches 1e6; the remainder uses the
// Euler-Maclaurin expansion, whose error is O(K^(-s-3)).
double zeta_tail(double s, double k0)
{
    double k_switch = std::ceil(std::pow(1e20, 1.0 / s));
    k_switch = std::min(std::max(k_switch, k0), std::max(k0, kExplicitLimit));
    const double K = k_switch;
    double sum = std::pow(K, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(K, -s) +
                 s * std::pow(K, -s - 1.0) / 12.0 -
                 s * (s + 1.0) * (s + 2.0) * std::pow(K, -s - 3.0) / 720.0;
    for (double k = K - 1.0; k >= k0; k -= 1.0) {
        sum += std::pow(k, -s);
    }
    return sum;
}

}  // namespace

LinearProcessSpec LinearProcessSpec::geometric(double alpha) { return {Geometric{alpha}, 12}; }
LinearProcessSpec LinearProcessSpec::power_decay(double beta) { return {PowerDecay{beta}, 12}; }
LinearProcessSpec LinearProcessSpec::finite(std::vector<double> coefficients)
{
    return {Finite{std::move(coefficients)}, 12};
}

double LinearProcessSpec::coefficient(std::size_t j) const
{
    return std::visit(overloaded{
                          [j](const Geometric& g) { return std::pow(g.alpha, static_cast<double>(j)); },
                          [j](const PowerDecay& p) { return std::pow(static_cast<double>(j + 1), -p.beta); },
                          [j](const Finite& f) { return j < f.coefficients.size() ? f.coefficients[j] : 0.0; },
                      },
                      rule);
}

std::string LinearProcessSpec::tag() const
{
    std::ostringstream os;
    std::visit(overloaded{
                   [&](const Geometric& g) { os << "geometric(alpha=" << g.alpha << ")"; },
                   [&](const PowerDecay& p) { os << "power_decay(beta=" << p.beta << ")"; },
                   [&](const Finite& f) { os << "finite(order=" << f.coefficients.size() << ")"; },
               },
               rule);
    return os.str();
}

void validate(const LinearProcessSpec& spec)
{
    if (spec.tail_cutoff < 0) {
        throw DomainError("linear process: tail_cutoff must be non-negative");
    }
    std::visit(overloaded{
                   [](const Geometric& g) {
                       if (!(std::abs(g.alpha) < 1.0)) {
                           throw DomainError("linear process: geometric rule needs |alpha| < 1");
                       }
                   },
                   [](const PowerDecay& p) {
                       if (!(p.beta > 0.5)) {
                           throw DomainError("linear process: power-decay rule needs beta > 1/2");
                       }
                   },
                   [](const Finite& f) {
                       if (f.coefficients.empty()) {
                           throw DomainError("linear process: finite rule needs coefficients");
                       }
                       for (double a : f.coefficients) {
                           if (!std::isfinite(a)) {
                               throw DomainError("linear process: non-finite coefficient");
                           }
                       }
                   },
               },
               spec.rule);
}

double tail_variance(const LinearProcessSpec& spec, std::size_t from_index)
{
    return std::visit(
        overloaded{
            [&](const Geometric& g) {
                const double a2 = g.alpha * g.alpha;
                return std::pow(a2, static_cast<double>(from_index)) / (1.0 - a2);
            },
            [&](const PowerDecay& p) { return zeta_tail(2.0 * p.beta, static_cast<double>(from_index + 1)); },
            [&](const Finite& f) {
                double s = 0.0;
                for (std::size_t j = f.coefficients.size(); j-- > from_index;) {
                    s += f.coefficients[j] * f.coefficients[j];
                }
                return s;
            },
        },
        spec.rule);
}

double stationary_variance(const LinearProcessSpec& spec) { return tail_variance(spec, 0); }

double stationary_cdf(const LinearProcessSpec& spec, double x)
{
    return norm_cdf(x / std::sqrt(stationary_variance(spec)));
}

std::string RandomEnvChainSpec::tag() const
{
    std::ostringstream os;
    os << "random_env(kappa=" << kappa << ",rho=" << rho << ",h1=" << h1_bound << ",h2=" << h2_bound
       << ",env=" << environment.tag() << ")";
    return os.str();
}

void validate(const RandomEnvChainSpec& spec)
{
    if (!(std::abs(spec.kappa) < 1.0)) {
        throw DomainError("random environment chain: need |kappa| < 1");
    }
    if (!(std::abs(spec.rho) < 1.0)) {
        throw DomainError("random environment chain: need |rho| < 1");
    }
    if (!(spec.h1_bound >= 0.0) || !(spec.h2_bound >= 0.0)) {
        throw DomainError("random environment chain: clamp bounds must be non-negative");
    }
    validate(spec.environment);
}

std::size_t random_env_burn_in(const RandomEnvChainSpec& spec)
{
    const double k = std::abs(spec.kappa);
    if (k == 0.0) {
        return 0;
    }
    return static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(k)));
}

std::string signal_tag(const SignalSpec& spec)
{
    return std::visit(overloaded{
                          [](const LinearProcessSpec& s) { return "linear:" + s.tag(); },
                          [](const RandomEnvChainSpec& s) { return s.tag(); },
                          [](const UniformIid&) { return std::string("uniform01"); },
                          [](const ArctanLinear& s) { return "arctan:" + s.inner.tag(); },
                      },
                      spec);
}

void validate(const SignalSpec& spec)
{
    std::visit(overloaded{
                   [](const LinearProcessSpec& s) { validate(s); },
                   [](const RandomEnvChainSpec& s) { validate(s); },
                   [](const UniformIid&) {},
                   [](const ArctanLinear& s) { validate(s.inner); },
               },
               spec);
}

const LinearProcessSpec* linear_part(const SignalSpec& spec)
{
    return std::visit(overloaded{
                          [](const LinearProcessSpec& s) -> const LinearProcessSpec* { return &s; },
                          [](const RandomEnvChainSpec& s) -> const LinearProcessSpec* { return &s.environment; },
                          [](const UniformIid&) -> const LinearProcessSpec* { return nullptr; },
                          [](const ArctanLinear& s) -> const LinearProcessSpec* { return &s.inner; },
                      },
                      spec);
}

// ---------------------------------------------------------------------------

std::shared_ptr<const LinearProcessPlan> make_plan(const LinearProcessSpec& spec)
{
    validate(spec);
    auto plan = std::make_shared<LinearProcessPlan>();
    plan->spec = spec;
    plan->variance = stationary_variance(spec);
    if (std::holds_alternative<Geometric>(spec.rule)) {
        return plan;
    }

    std::size_t window = 0;
    if (const auto* f = std::get_if<Finite>(&spec.rule)) {
        window = f->coefficients.size();
    } else {
        window = 1;
        while (window < kMaxWindow && tail_variance(spec, window) > kLumpThreshold) {
            window *= 2;
        }
        std::size_t lo = window / 2;
        std::size_t hi = window;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (tail_variance(spec, mid) > kLumpThreshold ? lo : hi) = mid;
        }
        window = std::min(hi, kMaxWindow);
    }

    plan->coefficients.resize(window);
    for (std::size_t j = 0; j < window; ++j) {
        plan->coefficients[j] = spec.coefficient(j);
    }
    plan->lump_variance.assign(window + 1, 0.0);
    plan->lump_variance[window] = tail_variance(spec, window);
    for (std::size_t w = window; w-- > 0;) {
        plan->lump_variance[w] = plan->lump_variance[w + 1] + plan->coefficients[w] * plan->coefficients[w];
    }
    plan->presample = std::min<std::size_t>(static_cast<std::size_t>(spec.tail_cutoff), window - 1);
    plan->reversed.assign(plan->coefficients.rbegin(), plan->coefficients.rend());
    return plan;
}

LinearProcessGenerator::LinearProcessGenerator(const LinearProcessSpec& spec, RngState rng)
    : LinearProcessGenerator(make_plan(spec), rng)
{
}

LinearProcessGenerator::LinearProcessGenerator(std::shared_ptr<const LinearProcessPlan> plan, RngState rng)
    : plan_(std::move(plan)), rng_(rng)
{
    if (plan_->window() == 0) {
        state_ = std::sqrt(plan_->variance) * next_gaussian(rng_);
        return;
    }
    history_.reserve(std::min<std::size_t>(2 * plan_->window(), 1024));
    for (std::size_t i = 0; i < plan_->presample; ++i) {
        push(next_gaussian(rng_));
    }
}

void LinearProcessGenerator::push(double eps)
{
    // Append-only buffer, compacted to the newest L - 1 noises once it
    // reaches 2L; memory grows with use, not with the window.
    const std::size_t L = plan_->window();
    if (history_.size() == 2 * L) {
        history_.erase(history_.begin(), history_.begin() + static_cast<std::ptrdiff_t>(L + 1));
    }
    history_.push_back(eps);
}

double LinearProcessGenerator::next()
{
    const double eps = next_gaussian(rng_);
    last_innovation_ = eps;
    if (plan_->window() == 0) {
        const double alpha = std::get<Geometric>(plan_->spec.rule).alpha;
        state_ = alpha * state_ + eps;
        return state_;
    }
    push(eps);
    const std::size_t L = plan_->window();
    const std::size_t w = std::min(history_.size(), L);
    // oldest-first noises against reversed coefficients a_{w-1} .. a_0
    const Eigen::Map<const Vector> recent(history_.data() + history_.size() - w, static_cast<Index>(w));
    const Eigen::Map<const Vector> coeffs(plan_->reversed.data() + L - w, static_cast<Index>(w));
    double x = recent.dot(coeffs);
    const double lump = plan_->lump_variance[w];
    if (lump > 0.0) {
        x += std::sqrt(lump) * next_gaussian(rng_);
    }
    return x;
}

// ---------------------------------------------------------------------------

RandomEnvGenerator::RandomEnvGenerator(const RandomEnvChainSpec& spec, RngState rng)
    : RandomEnvGenerator(spec, make_plan(spec.environment), rng)
{
}

RandomEnvGenerator::RandomEnvGenerator(const RandomEnvChainSpec& spec,
                                       std::shared_ptr<const LinearProcessPlan> env_plan, RngState rng)
    : spec_(spec), environment_(std::move(env_plan), rng.derive(1)), rng_(rng)
{
    validate(spec_);
    burn_in_ = random_env_burn_in(spec_);
    for (std::size_t i = 0; i < burn_in_; ++i) {
        step();
    }
}

double RandomEnvGenerator::step()
{
    const double y = environment_.next();
    const double e1 = environment_.last_innovation();
    const double e2 = next_gaussian(rng_);
    const double vol = std::exp(std::clamp(y, -spec_.h1_bound, spec_.h1_bound));
    const double shock = std::clamp(e1, -spec_.h2_bound, spec_.h2_bound);
    state_ = spec_.kappa * state_ + spec_.rho * vol * shock +
             std::sqrt(1.0 - spec_.rho * spec_.rho) * vol * e2;
    return state_;
}

double RandomEnvGenerator::next() { return step(); }

// ---------------------------------------------------------------------------

SignalSource::SignalSource(const SignalSpec& spec, RngState rng)
    : SignalSource(spec, linear_part(spec) ? make_plan(*linear_part(spec)) : nullptr, rng)
{
}

SignalSource::SignalSource(const SignalSpec& spec, std::shared_ptr<const LinearProcessPlan> plan, RngState rng)
    : impl_(rng)
{
    std::visit(overloaded{
                   [&](const LinearProcessSpec&) { impl_.emplace<LinearProcessGenerator>(plan, rng); },
                   [&](const RandomEnvChainSpec& s) { impl_.emplace<RandomEnvGenerator>(s, plan, rng); },
                   [&](const UniformIid&) {},
                   [&](const ArctanLinear&) {
                       impl_.emplace<LinearProcessGenerator>(plan, rng);
                       arctan_ = true;
                   },
               },
               spec);
}

double SignalSource::next()
{
    return std::visit(overloaded{
                          [this](LinearProcessGenerator& g) {
                              const double x = g.next();
                              return arctan_ ? std::atan(x) : x;
                          },
                          [](RandomEnvGenerator& g) { return g.next(); },
                          [](RngState& r) { return r.next_uniform(); },
                      },
                      impl_);
}

std::size_t SignalSource::burn_in() const
{
    if (const auto* g = std::get_if<RandomEnvGenerator>(&impl_)) {
        return g->burn_in();
    }
    return 0;
}

SignalPath gen_path(const SignalSpec& spec, RngState rng, std::size_t horizon)
{
    if (horizon == 0) {
        throw InputError("signal path: horizon must be at least 1");
    }
    validate(spec);
    SignalSource source(spec, rng);
    SignalPath path;
    path.values.resize(horizon);
    for (auto& v : path.values) {
        v = source.next();
    }
    path.spec_tag = signal_tag(spec);
    path.burn_in_used = source.burn_in();
    return path;
}

SignalPath gen_linear_path(const LinearProcessSpec& spec, RngState rng, std::size_t horizon)
{
    return gen_path(SignalSpec{spec}, rng, horizon);
}

SignalPath gen_random_env_path(const RandomEnvChainSpec& spec, RngState rng, std::size_t horizon)
{
    return gen_path(SignalSpec{spec}, rng, horizon);
}

}  // namespace satrack
