#ifndef SATRACK_TYPES_HPP
#define SATRACK_TYPES_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>

namespace satrack {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vector = VectorX<double>;
using Index = Eigen::Index;

/// Axis-aligned parameter box D = [lower_1, upper_1] x ... x [lower_N, upper_N].
template <typename Scalar>
struct BoxT {
    VectorX<Scalar> lower;
    VectorX<Scalar> upper;

    Index dimension() const { return lower.size(); }

    template <typename Derived>
    bool contains(const Eigen::MatrixBase<Derived>& theta) const
    {
        return theta.size() == lower.size() && (theta.array() >= lower.array()).all() &&
               (theta.array() <= upper.array()).all();
    }

    template <typename Derived>
    VectorX<Scalar> clamp(const Eigen::MatrixBase<Derived>& theta) const
    {
        return theta.cwiseMax(lower).cwiseMin(upper);
    }

    Scalar diameter() const { return (upper - lower).norm(); }

    static BoxT unbounded(Index n)
    {
        const Scalar inf = std::numeric_limits<Scalar>::infinity();
        return {VectorX<Scalar>::Constant(n, -inf), VectorX<Scalar>::Constant(n, inf)};
    }
};

using Box = BoxT<double>;

/// Closed real interval [lo, hi]; infinite ends allowed.
struct Interval {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
};

}  // namespace satrack

#endif  // SATRACK_TYPES_HPP
