#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "satrack/errors.hpp"
#include "satrack/mixing.hpp"

using namespace satrack;

namespace {

Vector v1(double a) { return Vector::Constant(1, a); }

Box interval(double lo, double hi) { return Box{v1(lo), v1(hi)}; }

// a single piece active for every x
PiecewiseIndicator everywhere(PieceFn g)
{
    Piece p;
    p.g = std::move(g);
    p.interval = BelowThreshold{[](const Vector&) { return std::numeric_limits<double>::infinity(); }, 0.0};
    p.g_bound = 10.0;
    p.g_lipschitz = 1.0;
    return PiecewiseIndicator{{p}, 1};
}

const double kSqrtThird = std::sqrt(1.0 / 3.0);

}  // namespace

TEST_CASE("gaussian absolute moments")
{
    CHECK(gaussian_abs_moment(2.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gaussian_abs_moment(4.0) == doctest::Approx(1.3160740129524924).epsilon(1e-14));  // 3^(1/4)
    CHECK(gaussian_abs_moment(3.0) == doctest::Approx(1.1685752549624655).epsilon(1e-14));
    CHECK_THROWS_AS(gaussian_abs_moment(0.5), DomainError);
}

TEST_CASE("exact linear gamma")
{
    CHECK(gamma_exact_linear(LinearProcessSpec::finite({1.0}), 1) == 0.0);
    const auto ar = LinearProcessSpec::geometric(0.5);
    CHECK(gamma_exact_linear(ar, 1) == doctest::Approx(kSqrtThird).epsilon(1e-14));
    CHECK(gamma_exact_linear(ar, 2) == doctest::Approx(0.5 * kSqrtThird).epsilon(1e-14));

    for (const auto& spec : {ar, LinearProcessSpec::power_decay(3.0), LinearProcessSpec::power_decay(0.8),
                             LinearProcessSpec::finite({1.0, -0.5, 0.25, 0.1})}) {
        double prev = gamma_exact_linear(spec, 1);
        for (std::size_t tau = 2; tau <= 100; ++tau) {
            const double g = gamma_exact_linear(spec, tau);
            REQUIRE(g <= prev);
            REQUIRE(g >= 0.0);
            prev = g;
        }
    }
}

TEST_CASE("power decay bound")
{
    const auto pd = LinearProcessSpec::power_decay(3.0);
    CHECK(gamma_bound_linear(pd, 2.0, 1) >= gamma_exact_linear(pd, 1));
    CHECK(gamma_bound_linear(pd, 2.0, 20) / gamma_bound_linear(pd, 2.0, 10) == doctest::Approx(0.25).epsilon(1e-13));

    // sum_{j >= 10} (j+1)^-3, mpmath
    const double direct = 0.004524917485401033;
    const double ratio = gamma_bound_linear(pd, 2.0, 10) / direct;
    CHECK(ratio >= 1.0);
    CHECK(ratio <= 1.2);

    for (double beta : {1.2, 1.7, 2.5, 3.0, 5.0}) {
        const auto spec = LinearProcessSpec::power_decay(beta);
        for (std::size_t tau = 1; tau <= 100; ++tau) {
            REQUIRE(gamma_bound_linear(spec, 2.0, tau) >= gamma_exact_linear(spec, tau));
        }
    }
    CHECK_THROWS_AS(gamma_bound_linear(LinearProcessSpec::power_decay(0.9), 2.0, 3), DomainError);
    CHECK_THROWS_AS(gamma_bound_linear(LinearProcessSpec::geometric(0.5), 2.0, 3), InputError);
}

TEST_CASE("gamma totals")
{
    const MixingProfile iid = gamma_total(LinearProcessSpec::finite({1.0}), 2.0, 10);
    CHECK(iid.gamma_total == 0.0);
    CHECK(iid.tail_bound == 0.0);

    const MixingProfile ar = gamma_total(LinearProcessSpec::geometric(0.5), 2.0, 60);
    CHECK(ar.gamma_sequence.size() == 60);
    CHECK(ar.tail_bound <= 1e-15);
    // sum_{tau >= 1} alpha^tau / sqrt(1 - alpha^2)
    CHECK(std::abs(ar.gamma_total - 2.0 * kSqrtThird) <= ar.tail_bound + 1e-14);
    CHECK(ar.exact);

    const MixingProfile pd = gamma_total(LinearProcessSpec::power_decay(3.0), 2.0, 256);
    CHECK(pd.tail_bound > 0.0);
    CHECK(std::isfinite(pd.tail_bound));
    const MixingProfile longer = gamma_total(LinearProcessSpec::power_decay(3.0), 2.0, 4096);
    CHECK(longer.gamma_total >= pd.gamma_total);
    CHECK(longer.gamma_total <= pd.gamma_total + pd.tail_bound);

    const MixingProfile r4 = gamma_total(LinearProcessSpec::power_decay(3.0), 4.0, 64);
    CHECK_FALSE(r4.exact);

    CHECK_THROWS_AS(gamma_total(LinearProcessSpec::power_decay(1.5), 2.0, 60), DomainError);
}

TEST_CASE("tail replacement coupling matches exact gamma")
{
    const auto ar = LinearProcessSpec::geometric(0.5);
    for (std::size_t tau : {1u, 3u, 5u}) {
        const CouplingEstimate est = gamma_coupling_estimate(ar, tau, 100000, RngState(11, tau));
        CHECK(std::abs(est.estimate - gamma_exact_linear(ar, tau)) <= 4.0 * est.stderr_);
    }
    const auto pd = LinearProcessSpec::power_decay(3.0);
    const CouplingEstimate est = gamma_coupling_estimate(pd, 2, 100000, RngState(12, 0));
    CHECK(std::abs(est.estimate - gamma_exact_linear(pd, 2)) <= 4.0 * est.stderr_);
}

TEST_CASE("clc constant")
{
    const auto ar = LinearProcessSpec::geometric(0.5);
    const ClcReport flat = estimate_clc(everywhere([](const Vector&, double) { return v1(0.7); }), ar,
                                        interval(-3.0, 3.0), 64, 32, RngState(5, 0));
    CHECK(flat.k_hat == 0.0);

    const ClcReport lin = estimate_clc(everywhere([](const Vector& t, double) { return t; }), ar,
                                       interval(-3.0, 3.0), 64, 32, RngState(5, 1));
    CHECK(lin.k_hat == doctest::Approx(1.0).epsilon(1e-12));

    // sup of the conditional N(m, 1) density
    const ClcReport pin = estimate_clc(QuantilePinball{0.975}, ar, interval(1.0, 3.5), 512, 256, RngState(5, 2));
    CHECK(pin.k_hat == doctest::Approx(0.3989422804014327).epsilon(0.05));
    CHECK(pin.k_hat <= 0.3989422804014327 + 1e-12);
    CHECK(pin.pairs_tested + pin.pairs_skipped == 512);

    CHECK_THROWS_AS(estimate_clc(QuantilePinball{0.5}, ar, Box::unbounded(1), 8, 8, RngState(5, 3)), ConfigError);
}

TEST_CASE("forgetting sums")
{
    const std::vector<Vector> grid{v1(1.5), v1(2.26), v1(3.0)};

    const ForgettingReport iid = forgetting_partial_sum(QuantilePinball{0.975}, LinearProcessSpec::finite({1.0}),
                                                        20, grid, 256, RngState(8, 0));
    for (std::size_t k = 1; k < iid.terms.size(); ++k) {
        CHECK(iid.terms[k] == 0.0);
    }

    const ForgettingReport ar = forgetting_partial_sum(QuantilePinball{0.975}, LinearProcessSpec::geometric(0.5), 60,
                                                       grid, 4096, RngState(8, 1));
    CHECK(ar.k_max == 60);
    CHECK(ar.theta_grid_size == 3);
    CHECK(ar.terms[10] <= ar.terms[5]);
    for (std::size_t k = 1; k < ar.partial_sums.size(); ++k) {
        REQUIRE(ar.partial_sums[k] >= ar.partial_sums[k - 1]);
    }
    CHECK(ar.partial_sums[60] - ar.partial_sums[30] <= 0.05 * ar.partial_sums[30]);

    CHECK_THROWS_AS(forgetting_partial_sum(QuantilePinball{0.5}, LinearProcessSpec::geometric(0.5), 5, {}, 16,
                                           RngState(8, 2)),
                    ConfigError);
}

TEST_CASE("maximal inequality has no growth trend")
{
    const auto ar = LinearProcessSpec::geometric(0.5);
    const std::vector<std::size_t> blocks{64, 128, 256, 512, 1024, 2048, 4096};
    const auto rep = check_maximal_inequality(ar, QuantilePinball{0.975}, v1(2.2631714681523434), 4.0, blocks, 400,
                                              RngState(9, 0));
    REQUIRE(rep.rows.size() == blocks.size());
    for (const auto& row : rep.rows) {
        CHECK(row.ratio > 0.0);
        CHECK(std::isfinite(row.ratio));
    }
    CHECK(rep.trend.slope >= -0.2);
    CHECK(rep.trend.slope <= 0.2);

    const auto doubled = check_maximal_inequality(ar, QuantilePinball{0.975}, v1(2.2631714681523434), 4.0, blocks,
                                                  400, RngState(9, 0), 2.0);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        CHECK(doubled.rows[i].moment == doctest::Approx(2.0 * rep.rows[i].moment).epsilon(1e-12));
    }

    CHECK_THROWS_AS(check_maximal_inequality(ar, QuantilePinball{0.975}, v1(2.0), 2.0, blocks, 10, RngState(9, 1)),
                    DomainError);
}

TEST_CASE("estimators do not depend on worker count")
{
    const auto ar = LinearProcessSpec::geometric(0.5);
    const auto a = gamma_coupling_estimate(ar, 3, 5000, RngState(4, 4), 1);
    const auto b = gamma_coupling_estimate(ar, 3, 5000, RngState(4, 4), 7);
    CHECK(a.estimate == b.estimate);
    CHECK(a.stderr_ == b.stderr_);

    const std::vector<Vector> grid{v1(2.0)};
    const auto f1 = forgetting_partial_sum(QuantilePinball{0.9}, ar, 10, grid, 300, RngState(4, 5), 1);
    const auto f3 = forgetting_partial_sum(QuantilePinball{0.9}, ar, 10, grid, 300, RngState(4, 5), 3);
    CHECK(f1.partial_sums == f3.partial_sums);

    const std::vector<std::size_t> blocks{64, 256};
    const auto m1 = check_maximal_inequality(ar, QuantilePinball{0.9}, v1(1.0), 3.0, blocks, 50, RngState(4, 6), 1.0, 1);
    const auto m5 = check_maximal_inequality(ar, QuantilePinball{0.9}, v1(1.0), 3.0, blocks, 50, RngState(4, 6), 1.0, 5);
    CHECK(m1.rows[1].moment == m5.rows[1].moment);
}
