#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "satrack/errors.hpp"
#include "satrack/normal.hpp"
#include "satrack/signals.hpp"

using namespace satrack;

namespace {

// pi^6 / 945 = zeta(6)
constexpr double kZeta6 = 1.0173430619844492;

struct Moments {
    double mean = 0.0;
    double var = 0.0;
};

Moments moments(const std::vector<double>& v)
{
    Moments m;
    for (double x : v) {
        m.mean += x;
    }
    m.mean /= static_cast<double>(v.size());
    for (double x : v) {
        m.var += (x - m.mean) * (x - m.mean);
    }
    m.var /= static_cast<double>(v.size() - 1);
    return m;
}

}  // namespace

TEST_CASE("tail_variance closed forms")
{
    CHECK(tail_variance(LinearProcessSpec::power_decay(3.0), 0) == doctest::Approx(kZeta6).epsilon(1e-12));
    CHECK(std::abs(tail_variance(LinearProcessSpec::power_decay(3.0), 0) - kZeta6) <= 1e-10);
    // sum_{k >= 6} k^-6 from mpmath
    CHECK(std::abs(tail_variance(LinearProcessSpec::power_decay(3.0), 5) - 3.8179246966286493e-05) <= 1e-12);
    CHECK(tail_variance(LinearProcessSpec::geometric(0.5), 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(tail_variance(LinearProcessSpec::geometric(0.5), 0) == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(tail_variance(LinearProcessSpec::finite({1.0, 0.5}), 2) == 0.0);
    CHECK(tail_variance(LinearProcessSpec::finite({1.0, 0.5}), 1) == 0.25);
    // beta = 0.75: sum (j+1)^-1.5 = zeta(1.5) = 2.612375348685488
    CHECK(std::abs(stationary_variance(LinearProcessSpec::power_decay(0.75)) - 2.612375348685488) <= 1e-9);
}

TEST_CASE("tail_variance is nonincreasing")
{
    for (const auto& spec : {LinearProcessSpec::geometric(0.9), LinearProcessSpec::power_decay(1.2),
                             LinearProcessSpec::finite({1.0, -2.0, 0.5})}) {
        double prev = tail_variance(spec, 0);
        for (std::size_t k = 1; k < 200; ++k) {
            const double t = tail_variance(spec, k);
            CHECK(t <= prev);
            prev = t;
        }
    }
}

TEST_CASE("linear process validation")
{
    CHECK_THROWS_AS(validate(LinearProcessSpec::geometric(1.0)), DomainError);
    CHECK_THROWS_AS(validate(LinearProcessSpec::power_decay(0.5)), DomainError);
    CHECK_THROWS_AS(validate(LinearProcessSpec::finite({})), DomainError);
    CHECK_NOTHROW(validate(LinearProcessSpec::power_decay(0.51)));
    RandomEnvChainSpec bad;
    bad.kappa = 1.0;
    CHECK_THROWS_AS(validate(bad), DomainError);
    bad.kappa = 0.5;
    bad.rho = 1.0;
    CHECK_THROWS_AS(validate(bad), DomainError);
}

TEST_CASE("stationary_cdf")
{
    CHECK(stationary_cdf(LinearProcessSpec::power_decay(2.0), 0.0) == 0.5);
    const double z = 1.959963984540054;
    CHECK(std::abs(stationary_cdf(LinearProcessSpec::geometric(0.5), z / std::sqrt(0.75)) - 0.975) <= 1e-12);
    CHECK(std::abs(stationary_cdf(LinearProcessSpec::power_decay(3.0), 1.976950) - 0.975) <= 1e-4);
}

TEST_CASE("finite [1] reproduces the raw noise")
{
    const SignalPath p = gen_linear_path(LinearProcessSpec::finite({1.0}), RngState(3, 4), 50);
    RngState r(3, 4);
    REQUIRE(p.values.size() == 50);
    for (double x : p.values) {
        CHECK(x == next_gaussian(r));
    }
}

TEST_CASE("finite process sums explicit noises")
{
    const std::vector<double> a{1.0, -0.5, 0.25};
    const SignalPath p = gen_linear_path(LinearProcessSpec::finite(a), RngState(1, 1), 20);
    // reconstruct the innovations by inverting the filter from the first value
    LinearProcessGenerator g(LinearProcessSpec::finite(a), RngState(1, 1));
    std::vector<double> eps;
    for (std::size_t t = 0; t < 20; ++t) {
        CHECK(g.next() == p.values[t]);
        eps.push_back(g.last_innovation());
    }
    for (std::size_t t = 2; t < 20; ++t) {
        CHECK(p.values[t] == doctest::Approx(eps[t] - 0.5 * eps[t - 1] + 0.25 * eps[t - 2]).epsilon(1e-14));
    }
}

TEST_CASE("geometric path follows the AR(1) recursion")
{
    LinearProcessGenerator g(LinearProcessSpec::geometric(0.5), RngState(8, 0));
    double prev = g.next();
    for (int t = 0; t < 100; ++t) {
        const double x = g.next();
        CHECK(x == doctest::Approx(0.5 * prev + g.last_innovation()).epsilon(1e-15));
        prev = x;
    }
}

TEST_CASE("stationary variances over 1e6 steps")
{
    const Moments ar = moments(gen_linear_path(LinearProcessSpec::geometric(0.5), RngState(11, 0), 1000000).values);
    CHECK(std::abs(ar.var / (4.0 / 3.0) - 1.0) <= 0.01);
    const Moments ma = moments(gen_linear_path(LinearProcessSpec::power_decay(3.0), RngState(12, 0), 1000000).values);
    CHECK(std::abs(ma.var / kZeta6 - 1.0) <= 0.01);
}

TEST_CASE("marginals are stationary from the first step")
{
    // moments of X_1 and X_40 over independent paths
    const auto spec = LinearProcessSpec::power_decay(1.0);
    const std::size_t paths = 100000;
    std::vector<double> first(paths);
    std::vector<double> later(paths);
    const auto plan = make_plan(spec);
    for (std::size_t p = 0; p < paths; ++p) {
        LinearProcessGenerator g(plan, RngState(21, p));
        first[p] = g.next();
        for (int t = 1; t < 39; ++t) {
            g.next();
        }
        later[p] = g.next();
    }
    const double var = stationary_variance(spec);
    const Moments m1 = moments(first);
    const Moments m2 = moments(later);
    const double se_mean = std::sqrt(var / paths);
    const double se_var = var * std::sqrt(2.0 / paths);
    CHECK(std::abs(m1.mean - m2.mean) <= 4.0 * std::sqrt(2.0) * se_mean);
    CHECK(std::abs(m1.var - m2.var) <= 4.0 * std::sqrt(2.0) * se_var);
    CHECK(std::abs(m1.var - var) <= 4.0 * se_var);
}

TEST_CASE("tail cutoff 12 and 40 give the same first two moments")
{
    auto s12 = LinearProcessSpec::power_decay(0.8);
    auto s40 = s12;
    s40.tail_cutoff = 40;
    const std::size_t paths = 100000;
    std::vector<double> a(paths);
    std::vector<double> b(paths);
    const auto p12 = make_plan(s12);
    const auto p40 = make_plan(s40);
    for (std::size_t p = 0; p < paths; ++p) {
        LinearProcessGenerator g12(p12, RngState(30, p));
        LinearProcessGenerator g40(p40, RngState(31, p));
        for (int t = 0; t < 5; ++t) {
            a[p] = g12.next();
            b[p] = g40.next();
        }
    }
    const double var = stationary_variance(s12);
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    CHECK(std::abs(ma.mean - mb.mean) <= 4.0 * std::sqrt(2.0 * var / paths));
    CHECK(std::abs(ma.var - mb.var) <= 4.0 * var * std::sqrt(4.0 / paths));
}

TEST_CASE("adjacent autocovariance matches the coefficients")
{
    // Cov(X_t, X_{t+1}) = sum_j a_j a_{j+1}; for geometric alpha: alpha / (1 - alpha^2)
    const auto v = gen_linear_path(LinearProcessSpec::geometric(0.5), RngState(40, 0), 1000000).values;
    double c = 0.0;
    for (std::size_t t = 0; t + 1 < v.size(); ++t) {
        c += v[t] * v[t + 1];
    }
    c /= static_cast<double>(v.size() - 1);
    CHECK(std::abs(c - 2.0 / 3.0) <= 0.01);
}

TEST_CASE("empty horizon is rejected")
{
    CHECK_THROWS_AS(gen_linear_path(LinearProcessSpec::geometric(0.5), RngState(), 0), InputError);
    CHECK_THROWS_AS(gen_random_env_path(RandomEnvChainSpec{}, RngState(), 0), InputError);
    CHECK_THROWS_AS(gen_path(UniformIid{}, RngState(), 0), InputError);
}

TEST_CASE("random environment reductions")
{
    RandomEnvChainSpec iid;  // kappa = rho = h1 = 0
    const SignalPath p = gen_random_env_path(iid, RngState(50, 0), 200000);
    CHECK(p.burn_in_used == 0);
    const Moments m = moments(p.values);
    CHECK(std::abs(m.mean) <= 4.0 / std::sqrt(200000.0));
    CHECK(std::abs(m.var - 1.0) <= 4.0 * std::sqrt(2.0 / 200000.0));

    RandomEnvChainSpec ar;
    ar.kappa = 0.5;
    const SignalPath q = gen_random_env_path(ar, RngState(51, 0), 400000);
    CHECK(q.burn_in_used == static_cast<std::size_t>(std::ceil(std::log(1e-12) / std::log(0.5))));
    const Moments mq = moments(q.values);
    const Moments ml = moments(gen_linear_path(LinearProcessSpec::geometric(0.5), RngState(52, 0), 400000).values);
    // AR(1) correlation inflates the standard errors by (1 + alpha) / (1 - alpha) = 3 in variance
    const double se_mean = std::sqrt(3.0 * (4.0 / 3.0) / 400000.0);
    CHECK(std::abs(mq.mean - ml.mean) <= 3.0 * std::sqrt(2.0) * se_mean);
    CHECK(std::abs(mq.var - ml.var) <= 3.0 * std::sqrt(2.0) * (4.0 / 3.0) * std::sqrt(2.0 * 5.0 / 3.0 / 400000.0));

    RandomEnvChainSpec sv;
    sv.kappa = 0.3;
    sv.rho = 0.5;
    sv.h1_bound = 1.0;
    sv.h2_bound = 1.0;
    sv.environment = LinearProcessSpec::geometric(0.7);
    const SignalPath s = gen_random_env_path(sv, RngState(53, 0), 200000);
    double m4 = 0.0;
    for (double x : s.values) {
        REQUIRE(std::isfinite(x));
        m4 += x * x * x * x;
    }
    m4 /= static_cast<double>(s.values.size());
    // |X| <= e / (1 - kappa) times a Gaussian-tailed noise; the e^4 moment bound is loose but finite
    CHECK(m4 < 3.0 * std::pow(std::exp(1.0) / (1.0 - 0.3), 4));
    CHECK(m4 > 0.0);
}

TEST_CASE("signal sources are reproducible")
{
    const SignalSpec spec = ArctanLinear{LinearProcessSpec::power_decay(2.0)};
    const SignalPath a = gen_path(spec, RngState(60, 9), 1000);
    const SignalPath b = gen_path(spec, RngState(60, 9), 1000);
    CHECK(a.values == b.values);
    for (double x : a.values) {
        CHECK(std::abs(x) < std::numbers::pi / 2);
    }
    const SignalPath u = gen_path(UniformIid{}, RngState(61, 0), 1000);
    for (double x : u.values) {
        CHECK(x > 0.0);
        CHECK(x < 1.0);
    }
    CHECK(!a.spec_tag.empty());
}
