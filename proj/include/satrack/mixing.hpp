#ifndef SATRACK_MIXING_HPP
#define SATRACK_MIXING_HPP

#include <cstddef>
#include <utility>
#include <vector>

#include "satrack/fields.hpp"
#include "satrack/linefit.hpp"
#include "satrack/rng.hpp"
#include "satrack/signals.hpp"
#include "satrack/types.hpp"

namespace satrack {

/// E|Z|^r)^(1/r) for Z standard normal.
double gaussian_abs_moment(double r);

/// gamma_2(tau) = sqrt(sum_{j >= tau} a_j^2). Exact for Gaussian linear
/// processes: X_t - E[X_t | eps_s, s > t - tau] = sum_{j >= tau} a_j eps_{t-j}.
double gamma_exact_linear(const LinearProcessSpec& spec, std::size_t tau);

/// C3 |eps|_r tau^(1 - beta) with C3 = 1 / (beta - 1), which dominates
/// tau^(beta - 1) sum_{j >= tau} (j + 1)^(-beta). PowerDecay rules only.
double gamma_bound_linear(const LinearProcessSpec& spec, double r, std::size_t tau);

struct MixingProfile {
    double order_r = 2.0;
    double m_r = 0.0;                     // |X_0|_r
    std::vector<double> gamma_sequence;   // tau = 1 .. tau_max
    double gamma_total = 0.0;             // sum of gamma_sequence
    double tail_bound = 0.0;              // bound on sum_{tau > tau_max}
    bool exact = true;                    // false when the sequence holds bounds
};

/// Truncated Gamma_r with a certified tail. Throws DomainError when the
/// sum diverges (PowerDecay with beta <= 2).
MixingProfile gamma_total(const LinearProcessSpec& spec, double r, std::size_t tau_max);

struct CouplingEstimate {
    double estimate = 0.0;
    double stderr_ = 0.0;
};

/**
 * Monte Carlo estimate of |X_t - E[X_t | eps_s, s > t - tau]|_2 by tail
 * replacement: two copies share eps_{t-tau+1..t} and have independent older
 * noise, so their difference has twice the target variance.
 */
CouplingEstimate gamma_coupling_estimate(const LinearProcessSpec& spec, std::size_t tau,
                                         std::size_t trials, RngState rng, unsigned workers = 0);

struct ClcReport {
    double k_hat = 0.0;       // max over pairs and histories
    double mean_ratio = 0.0;  // max over pairs of the history-averaged ratio
    std::size_t pairs_tested = 0;
    std::size_t pairs_skipped = 0;
    std::pair<Vector, Vector> worst_pair;
};

/**
 * Estimate of the conditional Lipschitz constant
 *   E[|H(t1, X_1) - H(t2, X_1)| | F_0] <= K |t1 - t2|.
 * Given a history, X_1 = a_0 eps_1 + m with m ~ N(0, tail_variance(1)), so the
 * conditional expectation is a one-dimensional Gaussian integral. Pairs are
 * t1 uniform in `domain` and t2 = t1 plus a log-uniform displacement, so
 * both separated and near-coincident pairs are probed. The reported k_hat
 * is a maximum over samples, i.e. a lower estimate of K.
 */
ClcReport estimate_clc(const UpdateField& field, const LinearProcessSpec& spec, const Box& domain,
                       std::size_t pair_count, std::size_t mc_samples, RngState rng,
                       unsigned workers = 0);

struct ForgettingReport {
    std::vector<double> terms;         // per k: sup over grid of E|E[H(theta, X_{k+1}) | F_0] - G(theta)|
    std::vector<double> partial_sums;  // running sums of terms
    std::size_t k_max = 0;
    std::size_t theta_grid_size = 0;
};

/**
 * Forgetting sums at n = 0. Given F_0, X_{k+1} ~ N(m_k, s_k^2) with
 * m_k = sqrt(tail_variance(k + 1)) Z_h and s_k^2 = Var X - tail_variance(k + 1).
 * One Z_h per history is shared across k so prefixes are reproducible.
 */
ForgettingReport forgetting_partial_sum(const UpdateField& field, const LinearProcessSpec& spec,
                                        std::size_t k_max, const std::vector<Vector>& theta_grid,
                                        std::size_t mc_histories, RngState rng, unsigned workers = 0);

struct MaximalRow {
    std::size_t block = 0;
    double moment = 0.0;  // E^{1/r} sup_{t <= m} |sum_{s <= t} b W_s|^r
    double ratio = 0.0;   // moment / (sqrt(m) sqrt(M_hat Gamma_hat))
};

struct MaximalInequalityReport {
    double order_r = 0.0;
    double m_hat = 0.0;      // empirical |W|_r
    double gamma_hat = 0.0;  // Gamma_r of the driving signal
    std::vector<MaximalRow> rows;
    LineFit trend;           // log2 ratio against log2 m
};

/**
 * Monte Carlo check of the Burkholder-type maximal inequality for
 * W_s = H(theta, X_s) - G(theta). Each trial draws one path of length
 * max(blocks) and reads every block size off its prefixes.
 * Throws DomainError unless r > 2.
 */
MaximalInequalityReport check_maximal_inequality(const LinearProcessSpec& spec, const UpdateField& field,
                                                 const Vector& theta, double r,
                                                 const std::vector<std::size_t>& blocks,
                                                 std::size_t trials, RngState rng, double weight = 1.0,
                                                 unsigned workers = 0);

}  // namespace satrack

#endif  // SATRACK_MIXING_HPP
