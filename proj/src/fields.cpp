#include "satrack/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include "satrack/errors.hpp"
#include "satrack/normal.hpp"
#include "satrack/parallel.hpp"
#include "satrack/quadrature.hpp"

namespace satrack {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kQuadratureNodes = 32;

bool in_interval(const IntervalRule& rule, const Vector& theta, double x)
{
    return std::visit(overloaded{
                          [&](const BelowThreshold& r) { return x <= r.h(theta); },
                          [&](const AboveThreshold& r) { return x > r.h(theta); },
                          [&](const Between& r) { return r.lower(theta) < x && x <= r.upper(theta); },
                      },
                      rule);
}

struct Cell {
    Index owner;
    double lo;
    double hi;
};

// Voronoi cells of a 1-D codebook, left to right. Coincident codewords give
// the whole cell to the lowest index, matching nearest_cell.
std::vector<Cell> voronoi_cells(const Vector& theta)
{
    std::vector<Index> order(static_cast<std::size_t>(theta.size()));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return theta[a] < theta[b]; });
    std::vector<Index> owners;
    for (Index i : order) {
        if (owners.empty() || theta[i] != theta[owners.back()]) {
            owners.push_back(i);
        }
    }
    std::vector<Cell> cells;
    double lo = -kInf;
    for (std::size_t k = 0; k < owners.size(); ++k) {
        const double hi = k + 1 < owners.size() ? 0.5 * (theta[owners[k]] + theta[owners[k + 1]]) : kInf;
        cells.push_back({owners[k], lo, hi});
        lo = hi;
    }
    return cells;
}

// Law of the stationary signal value as X = transform(sigma * Z), or uniform.
struct GaussianLaw {
    double sigma;
    bool arctan;

    double transform(double y) const { return arctan ? std::atan(y) : y; }
    // z-coordinate of an x-space point; +-inf outside the support.
    double to_z(double x) const
    {
        if (!arctan) {
            return x / sigma;
        }
        if (x >= M_PI_2) {
            return kInf;
        }
        if (x <= -M_PI_2) {
            return -kInf;
        }
        return std::tan(x) / sigma;
    }
    double cdf(double x) const { return norm_cdf(to_z(x)); }
};

struct UniformLaw {};

using StationaryLaw = std::variant<GaussianLaw, UniformLaw>;

StationaryLaw law_of(const SignalSpec& signal)
{
    return std::visit(overloaded{
                          [](const LinearProcessSpec& s) -> StationaryLaw {
                              return GaussianLaw{std::sqrt(stationary_variance(s)), false};
                          },
                          [](const ArctanLinear& s) -> StationaryLaw {
                              return GaussianLaw{std::sqrt(stationary_variance(s.inner)), true};
                          },
                          [](const UniformIid&) -> StationaryLaw { return UniformLaw{}; },
                          [](const RandomEnvChainSpec&) -> StationaryLaw {
                              throw ConfigError("mean field: no closed form for random-environment signals");
                          },
                      },
                      signal);
}

// Integral of a vector-valued f over [a, b] with composite Gauss-Legendre.
template <typename F>
Vector integrate_vector(const GaussLegendre& rule, F&& f, double a, double b, std::vector<double> cuts, Index n)
{
    Vector total = Vector::Zero(n);
    if (!(b > a)) {
        return total;
    }
    cuts.push_back(a);
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    Vector value(n);
    for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
        const double lo = std::max(a, cuts[s]);
        const double hi = std::min(b, cuts[s + 1]);
        if (!(hi > lo)) {
            continue;
        }
        const int panels = std::max(1, static_cast<int>(std::ceil(hi - lo)));
        const double width = (hi - lo) / panels;
        for (int p = 0; p < panels; ++p) {
            const double mid = lo + (p + 0.5) * width;
            const double half = 0.5 * width;
            for (Index k = 0; k < rule.size(); ++k) {
                f(mid + half * rule.nodes()[k], value);
                total += (half * rule.weights()[k]) * value;
            }
        }
    }
    return total;
}

Vector closed_form_pinball(const QuantilePinball& p, const StationaryLaw& law, double theta)
{
    const double below = std::visit(overloaded{
                                        [&](const GaussianLaw& g) { return g.cdf(theta); },
                                        [&](const UniformLaw&) { return std::clamp(theta, 0.0, 1.0); },
                                    },
                                    law);
    return Vector::Constant(1, p.q - below);
}

Vector closed_form_kohonen(const StationaryLaw& law, const Vector& theta)
{
    Vector g = Vector::Zero(theta.size());
    const GaussLegendre rule(kQuadratureNodes);
    for (const Cell& cell : voronoi_cells(theta)) {
        const double t = theta[cell.owner];
        g[cell.owner] = std::visit(
            overloaded{
                [&](const UniformLaw&) {
                    const double a = std::clamp(cell.lo, 0.0, 1.0);
                    const double b = std::clamp(cell.hi, 0.0, 1.0);
                    return 0.5 * (b * b - a * a) - t * (b - a);
                },
                [&](const GaussianLaw& law_g) {
                    const double zl = std::max(law_g.to_z(cell.lo), -kGaussianSpan);
                    const double zu = std::min(law_g.to_z(cell.hi), kGaussianSpan);
                    const auto integrand = [&](double z) {
                        return (law_g.transform(law_g.sigma * z) - t) * norm_pdf(z);
                    };
                    return rule.integrate(integrand, zl, zu);
                },
            },
            law);
    }
    return g;
}

Vector closed_form_generic(const UpdateField& field, const StationaryLaw& law, const Vector& theta)
{
    const Index n = field_dimension(field);
    const GaussLegendre rule(kQuadratureNodes);
    const std::vector<double> breaks = field_breakpoints(field, theta);
    return std::visit(overloaded{
                          [&](const UniformLaw&) {
                              auto f = [&](double u, Vector& out) { eval_field(field, theta, u, out); };
                              return integrate_vector(rule, f, 0.0, 1.0, breaks, n);
                          },
                          [&](const GaussianLaw& g) {
                              std::vector<double> z_breaks;
                              for (double b : breaks) {
                                  z_breaks.push_back(g.to_z(b));
                              }
                              auto f = [&](double z, Vector& out) {
                                  eval_field(field, theta, g.transform(g.sigma * z), out);
                                  out *= norm_pdf(z);
                              };
                              return integrate_vector(rule, f, -kGaussianSpan, kGaussianSpan, z_breaks, n);
                          },
                      },
                      law);
}

Vector closed_form(const ClosedForm& cf, const Vector& theta)
{
    const StationaryLaw law = law_of(cf.signal);
    return std::visit(overloaded{
                          [&](const QuantilePinball& p) { return closed_form_pinball(p, law, theta[0]); },
                          [&](const Kohonen&) { return closed_form_kohonen(law, theta); },
                          [&](const PiecewiseIndicator&) { return closed_form_generic(cf.field, law, theta); },
                      },
                      cf.field);
}

constexpr std::size_t kMonteCarloChunk = 4096;

MeanFieldValue monte_carlo(const MonteCarlo& mc, const Vector& theta, unsigned workers)
{
    if (mc.samples == 0) {
        throw ConfigError("mean field: Monte Carlo needs samples > 0");
    }
    validate(mc.signal);
    const Index n = field_dimension(mc.field);
    const std::size_t chunks = (mc.samples + kMonteCarloChunk - 1) / kMonteCarloChunk;
    const bool dependent = std::holds_alternative<RandomEnvChainSpec>(mc.signal);
    const auto* lin = linear_part(mc.signal);
    const auto plan = lin ? make_plan(*lin) : nullptr;
    const double sigma = lin ? std::sqrt(plan->variance) : 1.0;

    std::vector<Vector> sums(chunks, Vector::Zero(n));
    std::vector<Vector> squares(chunks, Vector::Zero(n));
    std::vector<std::size_t> counts(chunks, 0);
    parallel_for(chunks, workers, [&](std::size_t c) {
        const std::size_t begin = c * kMonteCarloChunk;
        const std::size_t count = std::min(kMonteCarloChunk, mc.samples - begin);
        RngState rng = mc.rng.derive(c);
        std::optional<RandomEnvGenerator> chain;
        if (dependent) {
            chain.emplace(std::get<RandomEnvChainSpec>(mc.signal), plan, rng);
        }
        Vector h(n);
        for (std::size_t i = 0; i < count; ++i) {
            double x = 0.0;
            if (chain) {
                x = chain->next();
            } else if (std::holds_alternative<UniformIid>(mc.signal)) {
                x = rng.next_uniform();
            } else {
                x = sigma * next_gaussian(rng);
                if (std::holds_alternative<ArctanLinear>(mc.signal)) {
                    x = std::atan(x);
                }
            }
            eval_field(mc.field, theta, x, h);
            sums[c] += h;
            squares[c] += h.cwiseAbs2();
        }
        counts[c] = count;
    });

    Vector total = Vector::Zero(n);
    for (const auto& s : sums) {
        total += s;
    }
    const double N = static_cast<double>(mc.samples);
    MeanFieldValue result{total / N, Vector::Zero(n)};
    if (dependent && chunks >= 2) {
        // Batch means over independent chains.
        Vector acc = Vector::Zero(n);
        for (std::size_t c = 0; c < chunks; ++c) {
            const Vector d = sums[c] / static_cast<double>(counts[c]) - result.value;
            acc += d.cwiseAbs2();
        }
        result.stderr_ = (acc / (static_cast<double>(chunks) * (chunks - 1))).cwiseSqrt();
    } else if (mc.samples >= 2) {
        Vector sq = Vector::Zero(n);
        for (const auto& s : squares) {
            sq += s;
        }
        const Vector var = ((sq / N) - result.value.cwiseAbs2()).cwiseMax(0.0) * (N / (N - 1.0));
        result.stderr_ = (var / N).cwiseSqrt();
    }
    return result;
}

}  // namespace

Index field_dimension(const UpdateField& field)
{
    return std::visit(overloaded{
                          [](const PiecewiseIndicator& p) { return p.dimension; },
                          [](const QuantilePinball&) { return Index{1}; },
                          [](const Kohonen& k) { return k.cells; },
                      },
                      field);
}

void validate(const UpdateField& field)
{
    std::visit(overloaded{
                   [](const PiecewiseIndicator& p) {
                       if (p.dimension < 1 || p.pieces.empty()) {
                           throw DomainError("piecewise field: need dimension >= 1 and at least one piece");
                       }
                       for (const auto& piece : p.pieces) {
                           if (!piece.g || !(piece.g_bound >= 0.0)) {
                               throw DomainError("piecewise field: each piece needs g and a bound");
                           }
                       }
                   },
                   [](const QuantilePinball& p) {
                       if (!(p.q > 0.0 && p.q < 1.0)) {
                           throw DomainError("pinball field: q must lie in (0, 1)");
                       }
                   },
                   [](const Kohonen& k) {
                       if (k.cells < 1) {
                           throw DomainError("kohonen field: need at least one cell");
                       }
                   },
               },
               field);
}

void eval_field(const UpdateField& field, const Vector& theta, double x, Eigen::Ref<Vector> out)
{
    std::visit(overloaded{
                   [&](const QuantilePinball& p) { out[0] = p.q - (x <= theta[0] ? 1.0 : 0.0); },
                   [&](const Kohonen&) {
                       out.setZero();
                       const Index i = nearest_cell(theta, x);
                       out[i] = x - theta[i];
                   },
                   [&](const PiecewiseIndicator& p) {
                       out.setZero();
                       for (const auto& piece : p.pieces) {
                           if (in_interval(piece.interval, theta, x)) {
                               out += piece.g(theta, x);
                           }
                       }
                   },
               },
               field);
}

Vector eval_field(const UpdateField& field, const Vector& theta, double x)
{
    Vector out(field_dimension(field));
    eval_field(field, theta, x, out);
    return out;
}

std::vector<double> field_breakpoints(const UpdateField& field, const Vector& theta)
{
    std::vector<double> breaks;
    std::visit(overloaded{
                   [&](const QuantilePinball&) { breaks.push_back(theta[0]); },
                   [&](const Kohonen&) {
                       for (const Cell& c : voronoi_cells(theta)) {
                           if (std::isfinite(c.hi)) {
                               breaks.push_back(c.hi);
                           }
                       }
                   },
                   [&](const PiecewiseIndicator& p) {
                       for (const auto& piece : p.pieces) {
                           std::visit(overloaded{
                                          [&](const BelowThreshold& r) { breaks.push_back(r.h(theta)); },
                                          [&](const AboveThreshold& r) { breaks.push_back(r.h(theta)); },
                                          [&](const Between& r) {
                                              breaks.push_back(r.lower(theta));
                                              breaks.push_back(r.upper(theta));
                                          },
                                      },
                                      piece.interval);
                       }
                   },
               },
               field);
    std::erase_if(breaks, [](double b) { return !std::isfinite(b); });
    return breaks;
}

double field_bound(const UpdateField& field, const Box& domain, Interval range)
{
    return std::visit(overloaded{
                          [](const QuantilePinball& p) { return std::max(p.q, 1.0 - p.q); },
                          [](const PiecewiseIndicator& p) {
                              double s = 0.0;
                              for (const auto& piece : p.pieces) {
                                  s += piece.g_bound;
                              }
                              return s;
                          },
                          [&](const Kohonen&) {
                              double b = 0.0;
                              for (Index i = 0; i < domain.dimension(); ++i) {
                                  b = std::max({b, std::abs(range.hi - domain.lower[i]),
                                                std::abs(domain.upper[i] - range.lo)});
                              }
                              return b;
                          },
                      },
                      field);
}

Interval signal_range(const SignalSpec& spec)
{
    if (std::holds_alternative<UniformIid>(spec)) {
        return {0.0, 1.0};
    }
    if (std::holds_alternative<ArctanLinear>(spec)) {
        return {-std::numbers::pi / 2, std::numbers::pi / 2};
    }
    return {};
}

bool has_closed_form(const UpdateField&, const SignalSpec& signal)
{
    return !std::holds_alternative<RandomEnvChainSpec>(signal);
}

MeanFieldValue mean_field_with_error(const MeanField& mf, const Vector& theta, unsigned workers)
{
    return std::visit(overloaded{
                          [&](const ClosedForm& cf) {
                              Vector g = closed_form(cf, theta);
                              Vector zero = Vector::Zero(g.size());
                              return MeanFieldValue{std::move(g), std::move(zero)};
                          },
                          [&](const MonteCarlo& mc) { return monte_carlo(mc, theta, workers); },
                      },
                      mf);
}

Vector mean_field(const MeanField& mf, const Vector& theta)
{
    return mean_field_with_error(mf, theta, 1).value;
}

}  // namespace satrack
