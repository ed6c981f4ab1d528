#ifndef SATRACK_FIELDS_HPP
#define SATRACK_FIELDS_HPP

#include <functional>
#include <variant>
#include <vector>

#include "satrack/rng.hpp"
#include "satrack/signals.hpp"
#include "satrack/types.hpp"

namespace satrack {

using ThresholdFn = std::function<double(const Vector&)>;
using PieceFn = std::function<Vector(const Vector&, double)>;

/// x <= h(theta)
struct BelowThreshold {
    ThresholdFn h;
    double lipschitz = 0.0;
};

/// x > h(theta)
struct AboveThreshold {
    ThresholdFn h;
    double lipschitz = 0.0;
};

/// lower(theta) < x <= upper(theta)
struct Between {
    ThresholdFn lower;
    ThresholdFn upper;
    double lipschitz = 0.0;  // common constant for both ends
};

using IntervalRule = std::variant<BelowThreshold, AboveThreshold, Between>;

struct Piece {
    PieceFn g;            // bounded, Lipschitz in (theta, x); returns an N-vector
    IntervalRule interval;
    double g_bound = 0.0;  // sup |g|
    double g_lipschitz = 0.0;
};

/// H(theta, x) = sum_j g_j(theta, x) 1{x in I_j(theta)}.
struct PiecewiseIndicator {
    std::vector<Piece> pieces;
    Index dimension = 1;
};

/// H(theta, x) = q - 1{x <= theta}; scalar parameter.
struct QuantilePinball {
    double q = 0.5;
};

/// Zero-neighbourhood Kohonen update: (x - theta^i) in the winning coordinate.
struct Kohonen {
    Index cells = 2;
};

using UpdateField = std::variant<PiecewiseIndicator, QuantilePinball, Kohonen>;

Index field_dimension(const UpdateField& field);
void validate(const UpdateField& field);

/// Index of the cell nearest to x; ties go to the lowest index.
template <typename Derived>
Index nearest_cell(const Eigen::MatrixBase<Derived>& theta, double x)
{
    Index best = 0;
    auto best_dist = std::abs(x - theta[0]);
    for (Index i = 1; i < theta.size(); ++i) {
        const auto d = std::abs(x - theta[i]);
        if (d < best_dist) {
            best = i;
            best_dist = d;
        }
    }
    return best;
}

/// Writes H(theta, x) into `out` (size N). No allocation for pinball/Kohonen.
void eval_field(const UpdateField& field, const Vector& theta, double x, Eigen::Ref<Vector> out);
Vector eval_field(const UpdateField& field, const Vector& theta, double x);

/// x-locations where H(theta, .) may jump.
std::vector<double> field_breakpoints(const UpdateField& field, const Vector& theta);

/// Certified bound on sup |H| over domain x signal_range.
double field_bound(const UpdateField& field, const Box& domain, Interval signal_range = {});

/// Range of a stationary signal value.
Interval signal_range(const SignalSpec& spec);

// ---------------------------------------------------------------------------
// Mean fields G(theta) = E H(theta, X_0).
// ---------------------------------------------------------------------------

/// Exact evaluation (closed form or deterministic quadrature). Available for
/// Gaussian linear, uniform and arctan-of-Gaussian signals.
struct ClosedForm {
    UpdateField field;
    SignalSpec signal;
};

/// Sample average of H(theta, X) over fresh stationary draws, with standard error.
struct MonteCarlo {
    UpdateField field;
    SignalSpec signal;
    std::size_t samples = 0;
    RngState rng;
};

using MeanField = std::variant<ClosedForm, MonteCarlo>;

struct MeanFieldValue {
    Vector value;
    Vector stderr_;  // zeros for ClosedForm
};

bool has_closed_form(const UpdateField& field, const SignalSpec& signal);

MeanFieldValue mean_field_with_error(const MeanField& mf, const Vector& theta, unsigned workers = 0);
Vector mean_field(const MeanField& mf, const Vector& theta);

/// Callable adaptor G(theta) for the recursion templates; holds its own copy.
inline auto mean_field_fn(MeanField mf)
{
    return [mf = std::move(mf)](const Vector& theta) { return mean_field(mf, theta); };
}

}  // namespace satrack

#endif  // SATRACK_FIELDS_HPP
