#include "satrack/rng.hpp"

#include "satrack/normal.hpp"

namespace satrack {

RngState::RngState(std::uint64_t seed, std::uint64_t stream_index)
    : seed_(seed),
      stream_(stream_index),
      key_lo_(hash64(seed, stream_index)),
      key_hi_(mix64(hash64(stream_index, ~seed)))
{
}

double next_gaussian(RngState& state) { return norm_quantile_unchecked(state.next_uniform()); }

}  // namespace satrack
