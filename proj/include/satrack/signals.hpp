#ifndef SATRACK_SIGNALS_HPP
#define SATRACK_SIGNALS_HPP

#include <cstddef>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "satrack/rng.hpp"
#include "satrack/types.hpp"

namespace satrack {

// ---------------------------------------------------------------------------
// Causal linear processes X_t = sum_j a_j eps_{t-j}, eps i.i.d. N(0, 1).
// ---------------------------------------------------------------------------

/// a_j = alpha^j (the AR(1) case), |alpha| < 1.
struct Geometric {
    double alpha = 0.0;
};

/// a_j = (j + 1)^(-beta), beta > 1/2.
struct PowerDecay {
    double beta = 1.0;
};

/// a_j taken from the list, zero beyond it.
struct Finite {
    std::vector<double> coefficients;
};

using CoefficientRule = std::variant<Geometric, PowerDecay, Finite>;

struct LinearProcessSpec {
    CoefficientRule rule;
    /// Pre-sample noises drawn explicitly before the Gaussian tail lump.
    int tail_cutoff = 12;

    static LinearProcessSpec geometric(double alpha);
    static LinearProcessSpec power_decay(double beta);
    static LinearProcessSpec finite(std::vector<double> coefficients);

    double coefficient(std::size_t j) const;
    std::string tag() const;
};

/// Throws DomainError unless the coefficients are square summable.
void validate(const LinearProcessSpec& spec);

/// sum_{j >= from_index} a_j^2, absolute error below 1e-10.
double tail_variance(const LinearProcessSpec& spec, std::size_t from_index);

/// Var(X_0) = tail_variance(spec, 0).
double stationary_variance(const LinearProcessSpec& spec);

/// P(X_0 <= x) for the Gaussian stationary law.
double stationary_cdf(const LinearProcessSpec& spec, double x);

// ---------------------------------------------------------------------------
// Markov chain in a random environment (stochastic-volatility type):
//   X_{t+1} = kappa X_t + rho e^{h1(Y_{t+1})} h2(e1_{t+1})
//             + sqrt(1 - rho^2) e^{h1(Y_{t+1})} e2_{t+1},
// Y a linear process driven by e1, h1/h2 symmetric clamps.
// ---------------------------------------------------------------------------

struct RandomEnvChainSpec {
    double kappa = 0.0;
    double rho = 0.0;
    double h1_bound = 0.0;
    double h2_bound = 0.0;
    LinearProcessSpec environment = LinearProcessSpec::geometric(0.0);

    std::string tag() const;
};

void validate(const RandomEnvChainSpec& spec);

/// Steps discarded to forget X_0 = 0: ceil(ln(1e-12) / ln|kappa|), 0 when kappa = 0.
std::size_t random_env_burn_in(const RandomEnvChainSpec& spec);

/// I.i.d. uniform draws on (0, 1).
struct UniformIid {};

/// Y_t = atan(X_t) for a Gaussian linear process X.
struct ArctanLinear {
    LinearProcessSpec inner;
};

using SignalSpec = std::variant<LinearProcessSpec, RandomEnvChainSpec, UniformIid, ArctanLinear>;

std::string signal_tag(const SignalSpec& spec);
void validate(const SignalSpec& spec);

struct SignalPath {
    std::vector<double> values;  // X_1 .. X_T
    std::string spec_tag;
    std::size_t burn_in_used = 0;
};

// ---------------------------------------------------------------------------
// Streaming generators. Each owns its RngState; a path is a pure function
// of (spec, seed, stream_index).
// ---------------------------------------------------------------------------

/// Precomputed coefficients and tail variances shared by all paths of a spec.
struct LinearProcessPlan {
    LinearProcessSpec spec;
    std::vector<double> coefficients;   // a_0 .. a_{L-1}; empty for Geometric
    std::vector<double> reversed;       // a_{L-1} .. a_0
    std::vector<double> lump_variance;  // lump_variance[w] = tail_variance(spec, w), w <= L
    std::size_t presample = 0;          // explicit pre-sample noises
    double variance = 0.0;              // stationary variance

    std::size_t window() const { return coefficients.size(); }
};

std::shared_ptr<const LinearProcessPlan> make_plan(const LinearProcessSpec& spec);

/**
 * Exact-stationary sampler for a linear process.
 *
 * Geometric rules run the AR(1) recursion from a stationary X_0. Other rules
 * use X_t = sum_{j < w_t} a_j eps_{t-j} + lump_t with window
 * w_t = min(t + presample, L) and lump_t ~ N(0, tail_variance(w_t)), so
 * every marginal is exactly N(0, Var X_0). L is where the tail variance
 * first drops below 1e-12 (capped at 65536), so the only approximation is
 * the cross-time correlation carried by lumps of at most that variance.
 */
class LinearProcessGenerator {
  public:
    LinearProcessGenerator(std::shared_ptr<const LinearProcessPlan> plan, RngState rng);
    LinearProcessGenerator(const LinearProcessSpec& spec, RngState rng);

    double next();
    /// Innovation eps_t used by the most recent next().
    double last_innovation() const { return last_innovation_; }

  private:
    std::shared_ptr<const LinearProcessPlan> plan_;
    RngState rng_;
    std::vector<double> history_;  // past noises, newest last
    double state_ = 0.0;  // AR(1) state
    double last_innovation_ = 0.0;

    void push(double eps);
};

class RandomEnvGenerator {
  public:
    RandomEnvGenerator(const RandomEnvChainSpec& spec, RngState rng);
    RandomEnvGenerator(const RandomEnvChainSpec& spec,
                       std::shared_ptr<const LinearProcessPlan> env_plan, RngState rng);

    double next();
    std::size_t burn_in() const { return burn_in_; }

  private:
    RandomEnvChainSpec spec_;
    LinearProcessGenerator environment_;
    RngState rng_;
    double state_ = 0.0;
    std::size_t burn_in_ = 0;

    double step();
};

/// Streaming source for any SignalSpec.
class SignalSource {
  public:
    SignalSource(const SignalSpec& spec, RngState rng);
    /// Reuses precomputed plans; `plan` must match the signal's linear part.
    SignalSource(const SignalSpec& spec, std::shared_ptr<const LinearProcessPlan> plan, RngState rng);

    double next();
    std::size_t burn_in() const;

  private:
    std::variant<LinearProcessGenerator, RandomEnvGenerator, RngState> impl_;
    bool arctan_ = false;
};

/// Linear part of a spec, if any (the environment for random-environment chains).
const LinearProcessSpec* linear_part(const SignalSpec& spec);

SignalPath gen_linear_path(const LinearProcessSpec& spec, RngState rng, std::size_t horizon);
SignalPath gen_random_env_path(const RandomEnvChainSpec& spec, RngState rng, std::size_t horizon);
SignalPath gen_path(const SignalSpec& spec, RngState rng, std::size_t horizon);

}  // namespace satrack

#endif  // SATRACK_SIGNALS_HPP
