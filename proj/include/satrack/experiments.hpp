#ifndef SATRACK_EXPERIMENTS_HPP
#define SATRACK_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "satrack/fields.hpp"
#include "satrack/linefit.hpp"
#include "satrack/recursion.hpp"
#include "satrack/signals.hpp"
#include "satrack/types.hpp"

namespace satrack {

struct FixedHorizon {
    std::size_t steps = 1;
};

/// T(lambda) = ceil(c / lambda).
struct PerGain {
    double c = 20.0;
};

using HorizonRule = std::variant<FixedHorizon, PerGain>;

std::size_t horizon_for(const HorizonRule& rule, double gain);

struct Analytic {};

/// theta* taken as the path mean of theta_T from a run at lambda_ref.
struct SelfReferential {
    double lambda_ref = 0.0;
};

using ReferenceRule = std::variant<Analytic, SelfReferential>;

struct ExperimentConfig {
    std::string name;
    SignalSpec signal;
    UpdateField field;
    Vector theta0;
    Box domain;
    DomainPolicy domain_policy = DomainPolicy::none;
    std::vector<double> lambda_grid;  // strictly decreasing, each in (0, 1)
    HorizonRule horizon = PerGain{};
    std::size_t paths = 2;
    std::uint64_t base_seed = 0;
    ReferenceRule reference = Analytic{};
};

/// Throws ValidationError naming the offending key.
void validate(const ExperimentConfig& cfg);

/// Lane used for the reference run so its streams never collide with grid paths.
inline constexpr std::uint64_t kReferenceLane = ~std::uint64_t{0};

/// Stream of path `path` at grid position `lambda_index`.
inline RngState path_stream(std::uint64_t base_seed, std::uint64_t lambda_index, std::uint64_t path)
{
    return RngState(base_seed, hash64(lambda_index, path));
}

struct ReferenceValue {
    Vector theta;
    Vector stderr_;                   // zeros for analytic references
    std::optional<double> residual;   // sup-norm of G(theta) when G is exact
    int iterations = 0;               // solver iterations, 0 if closed form
    std::string method;
};

/// Closed forms for pinball fields, the 2-D root solver for other exact
/// mean fields, or a self-referential run. Throws ConfigError when an
/// analytic reference is requested but unavailable.
ReferenceValue reference_value(const ExperimentConfig& cfg, unsigned workers = 0);

struct CurveRow {
    double lambda = 0.0;
    double mean_abs_error = 0.0;
    double stderr_ = 0.0;
    std::size_t paths = 0;
    std::size_t horizon = 0;
    std::size_t exits = 0;
    Vector mean_theta;
    Vector theta_stderr;
};

struct ErrorCurve {
    std::vector<CurveRow> rows;
    std::optional<LineFit> slope_fit;  // set when the grid has two or more points
    ReferenceValue reference;
};

/// log2(mean_abs_error) against log2(lambda). Throws InputError on fewer than two rows.
LineFit rate_fit(const ErrorCurve& curve);

/// Monte Carlo mean of |theta_T - theta*|_2 per gain. More than 1% of paths
/// leaving the domain (policy none) raises DomainExitError.
ErrorCurve run_error_curve(const ExperimentConfig& cfg, unsigned workers = 0);
ErrorCurve run_error_curve(const ExperimentConfig& cfg, const ReferenceValue& reference, unsigned workers = 0);

struct GapRow {
    std::size_t t = 0;
    double mean_gap = 0.0;
    double stderr_ = 0.0;
};

struct GapCurve {
    double lambda = 0.0;
    std::vector<GapRow> rows;
    double max_gap = 0.0;
    std::size_t exits = 0;
};

/// Mean |theta_t - z_t| at the given absolute times for one gain (0 allowed).
/// Needs an exact mean field.
GapCurve tracking_gap(const ExperimentConfig& cfg, double gain, std::uint64_t lambda_index,
                      const std::vector<std::size_t>& sample_times, unsigned workers = 0);

struct TrackingGapReport {
    std::vector<GapCurve> curves;
    std::optional<LineFit> slope_fit;  // log2 max_gap against log2 lambda
};

TrackingGapReport tracking_gap_curve(const ExperimentConfig& cfg, const std::vector<std::size_t>& sample_times,
                                     unsigned workers = 0);

}  // namespace satrack

#endif  // SATRACK_EXPERIMENTS_HPP
