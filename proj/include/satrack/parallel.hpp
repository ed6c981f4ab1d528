#ifndef SATRACK_PARALLEL_HPP
#define SATRACK_PARALLEL_HPP

#include <cstddef>
#include <functional>
#include <span>

namespace satrack {

/// Worker count for `requested` (0 means hardware concurrency, at least 1).
unsigned resolve_workers(unsigned requested);

/**
 * Calls body(i) for i in [0, count) on up to `workers` threads.
 *
 * Items are handed out by index; callers write results into per-index
 * slots and reduce afterwards, so the outcome does not depend on the
 * worker count. The first exception thrown by any item is rethrown.
 */
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

/// Pairwise (tree) summation in index order; bitwise stable for a given input.
double pairwise_sum(std::span<const double> values);

}  // namespace satrack

#endif  // SATRACK_PARALLEL_HPP
