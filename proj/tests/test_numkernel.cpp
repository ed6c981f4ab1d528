#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "satrack/errors.hpp"
#include "satrack/fixed_point.hpp"
#include "satrack/linefit.hpp"
#include "satrack/normal.hpp"
#include "satrack/parallel.hpp"
#include "satrack/quadrature.hpp"
#include "satrack/rng.hpp"

using namespace satrack;

// Reference values from scipy.stats.norm (double precision).
constexpr double kZ975 = 1.959963984540054;

TEST_CASE("rng streams are reproducible and distinct")
{
    RngState a(42, 0);
    RngState b(42, 0);
    for (int i = 0; i < 100; ++i) {
        CHECK(next_gaussian(a) == next_gaussian(b));
    }
    RngState c(42, 1);
    RngState d(42, 0);
    int same = 0;
    for (int i = 0; i < 100; ++i) {
        same += c.next_u64() == d.next_u64();
    }
    CHECK(same == 0);

    // copying forks an identical continuation
    RngState e(7, 3);
    e.next_u64();
    RngState f = e;
    CHECK(e.next_u64() == f.next_u64());
    CHECK(e.derive(5).next_u64() == f.derive(5).next_u64());
}

TEST_CASE("gaussian moments over 1e6 draws")
{
    RngState r(42, 0);
    const int n = 1000000;
    double s = 0.0;
    double s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = next_gaussian(r);
        s += z;
        s2 += z * z;
    }
    const double mean = s / n;
    CHECK(std::abs(mean) <= 4e-3);
    CHECK(std::abs(s2 / n - mean * mean - 1.0) <= 6e-3);
}

TEST_CASE("independent streams are uncorrelated")
{
    RngState a(9, 100);
    RngState b(9, 101);
    const int n = 1000000;
    double sab = 0.0;
    for (int i = 0; i < n; ++i) {
        sab += next_gaussian(a) * next_gaussian(b);
    }
    // sd of the sample correlation is 1/sqrt(n)
    CHECK(std::abs(sab / n) <= 4.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("uniforms stay inside the open unit interval")
{
    RngState r(0, 0);
    for (int i = 0; i < 100000; ++i) {
        const double u = r.next_uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("norm_cdf against reference values")
{
    CHECK(norm_cdf(0.0) == 0.5);
    CHECK(norm_cdf(kZ975) == doctest::Approx(0.975).epsilon(1e-13));
    CHECK(std::abs(norm_cdf(-1.5) - 0.06680720126885807) <= 1e-12);
    CHECK(std::abs(norm_cdf(0.5) - 0.6914624612740131) <= 1e-12);
    CHECK(std::abs(norm_cdf(3.0) - 0.9986501019683699) <= 1e-12);
    CHECK(std::abs(norm_cdf(-8.0) - 6.22096057427174e-16) <= 1e-12);
    for (double x : {0.5, 1.0, 3.0}) {
        CHECK(std::abs(norm_cdf(-x) - (1.0 - norm_cdf(x))) <= 1e-15);
    }
}

TEST_CASE("norm_quantile accuracy and round trip")
{
    CHECK(norm_quantile(0.5) == 0.0);
    CHECK(std::abs(norm_quantile(0.975) - kZ975) <= 1e-8);
    const double ref[][2] = {{1e-10, -6.361340902404056}, {0.02, -2.053748910631823},
                             {0.3, -0.5244005127080409}, {0.9, 1.2815515655446004},
                             {0.999999, 4.753424308817087}};
    for (const auto& pq : ref) {
        CHECK(std::abs(norm_quantile(pq[0]) - pq[1]) <= 1e-12 * std::max(1.0, std::abs(pq[1])));
    }
    for (double x : {-2.0, 0.3, 2.26}) {
        CHECK(std::abs(norm_quantile(norm_cdf(x)) - x) <= 1e-8);
    }
    CHECK_THROWS_AS(norm_quantile(0.0), DomainError);
    CHECK_THROWS_AS(norm_quantile(1.0), DomainError);
    CHECK_THROWS_AS(norm_quantile(-0.2), DomainError);
}

TEST_CASE("normal functions are monotone on a fine grid")
{
    double prev_q = -INFINITY;
    double prev_c = 0.0;
    for (int i = 1; i < 10000; ++i) {
        const double p = i / 10000.0;
        const double q = norm_quantile(p);
        CHECK(q > prev_q);
        prev_q = q;
        const double x = -8.0 + 16.0 * i / 10000.0;
        const double c = norm_cdf(x);
        CHECK(c >= prev_c);
        prev_c = c;
        CHECK(std::abs(norm_cdf(q) - p) <= 1e-9);
    }
}

TEST_CASE("gauss-legendre rule")
{
    const GaussLegendre two(2);
    CHECK(two.nodes()[0] == doctest::Approx(-1.0 / std::sqrt(3.0)).epsilon(1e-15));
    CHECK(two.weights().sum() == doctest::Approx(2.0).epsilon(1e-15));
    const GaussLegendre rule(16);
    // exact for degree 31
    const double v = rule.integrate([](double x) { return std::pow(x, 30); }, -1.0, 1.0, {}, 2.0);
    CHECK(v == doctest::Approx(2.0 / 31.0).epsilon(1e-13));
    const double step = rule.integrate([](double x) { return x < 0.3 ? 1.0 : 0.0; }, -1.0, 1.0,
                                       std::vector<double>{0.3});
    CHECK(step == doctest::Approx(1.3).epsilon(1e-14));
    CHECK_THROWS_AS(GaussLegendre(0), ConfigError);
}

TEST_CASE("gauss_expectation")
{
    CHECK(gauss_expectation([](double) { return 1.0; }, 1.0) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(std::abs(gauss_expectation([](double x) { return x; }, 2.0)) <= 1e-13);
    CHECK(gauss_expectation([](double x) { return x * x; }, 1.5) == doctest::Approx(2.25).epsilon(1e-12));
    // E[cos(sZ)] = exp(-s^2 / 2)
    CHECK(gauss_expectation([](double x) { return std::cos(x); }, 0.7) ==
          doctest::Approx(std::exp(-0.245)).epsilon(1e-12));
    // indicator clip at x = 1 with sigma 2: P(2Z <= 1)
    const std::vector<double> brk{1.0};
    CHECK(gauss_expectation([](double x) { return x <= 1.0 ? 1.0 : 0.0; }, 2.0, 16, brk) ==
          doctest::Approx(norm_cdf(0.5)).epsilon(1e-13));
    CHECK_THROWS_AS(gauss_expectation([](double) { return 1.0; }, 1.0, 15), ConfigError);
}

TEST_CASE("fit_line")
{
    {
        const std::vector<std::pair<double, double>> pts{{-4, -2}, {-6, -3}, {-8, -4}};
        const LineFit f = fit_line(pts);
        CHECK(f.slope == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(std::abs(f.intercept) <= 1e-12);
        CHECK(f.residual_norm <= 1e-12);
    }
    {
        const std::vector<std::pair<double, double>> pts{{0, 1}, {1, 2}, {2, 3}};
        const LineFit f = fit_line(pts);
        CHECK(f.slope == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(f.intercept == doctest::Approx(1.0).epsilon(1e-14));
    }
    {
        RngState r(5, 0);
        std::vector<std::pair<double, double>> pts;
        for (int i = 0; i < 6; ++i) {
            pts.emplace_back(i, 0.5 * i + 0.01 * next_gaussian(r));
        }
        CHECK(std::abs(fit_line(pts).slope - 0.5) <= 0.1);
    }
    const std::vector<std::pair<double, double>> one{{1, 2}};
    CHECK_THROWS_AS(fit_line(one), InputError);
    const std::vector<std::pair<double, double>> same_x{{1, 2}, {1, 3}};
    CHECK_THROWS_AS(fit_line(same_x), InputError);
}

TEST_CASE("solve_fixed_point_2d")
{
    const Eigen::Vector2d target(1.0, 2.0);
    const auto res = solve_fixed_point_2d([&](const Eigen::Vector2d& t) -> Eigen::Vector2d { return t - target; },
                                          Eigen::Vector2d::Zero(), 1e-12, 100);
    CHECK((res.root - target).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(res.residual <= 1e-12);

    // uniform Kohonen mean field, residual -G
    auto kohonen = [](const Eigen::Vector2d& t) -> Eigen::Vector2d {
        const double m = 0.5 * (t[0] + t[1]);
        return {-(0.5 * m * m - t[0] * m), -(0.5 * (1.0 - m * m) - t[1] * (1.0 - m))};
    };
    const auto k = solve_fixed_point_2d(kohonen, Eigen::Vector2d(0.01, 0.02), 1e-13, 10000);
    CHECK(std::abs(k.root[0] - 0.25) <= 1e-10);
    CHECK(std::abs(k.root[1] - 0.75) <= 1e-10);

    // a map with no root: R(t) = (1, 1)
    try {
        solve_fixed_point_2d([](const Eigen::Vector2d&) -> Eigen::Vector2d { return {1.0, 1.0}; },
                             Eigen::Vector2d::Zero(), 1e-10, 20);
        FAIL("expected non-convergence");
    } catch (const NonConvergenceError& e) {
        CHECK(e.last_iterate().size() == 2);
        CHECK(e.last_residual() == doctest::Approx(1.0));
    }
}

TEST_CASE("parallel_for and pairwise_sum are layout independent")
{
    std::vector<double> a(10007);
    std::vector<double> b(10007);
    auto body = [](std::vector<double>& out) {
        return [&out](std::size_t i) { out[i] = std::sin(static_cast<double>(i)) * 1e-3 + 1.0 / (i + 1.0); };
    };
    parallel_for(a.size(), 1, body(a));
    parallel_for(b.size(), 8, body(b));
    CHECK(a == b);
    CHECK(pairwise_sum(a) == pairwise_sum(b));
    const double naive = std::accumulate(a.begin(), a.end(), 0.0);
    CHECK(pairwise_sum(a) == doctest::Approx(naive).epsilon(1e-13));
    CHECK(pairwise_sum(std::span<const double>{}) == 0.0);

    CHECK_THROWS_AS(parallel_for(100, 4,
                                 [](std::size_t i) {
                                     if (i == 57) {
                                         throw InputError("boom");
                                     }
                                 }),
                    InputError);
}
