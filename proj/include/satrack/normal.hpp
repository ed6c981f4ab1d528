#ifndef SATRACK_NORMAL_HPP
#define SATRACK_NORMAL_HPP

namespace satrack {

inline constexpr double kInvSqrt2Pi = 0.398942280401432677939946059934;

double norm_pdf(double x);

/// Standard normal distribution function, via the complementary error function.
double norm_cdf(double x);

/// Inverse of norm_cdf on (0, 1); throws DomainError outside.
double norm_quantile(double p);

/// norm_quantile without the range check, for the sampling hot path.
double norm_quantile_unchecked(double p);

}  // namespace satrack

#endif  // SATRACK_NORMAL_HPP
