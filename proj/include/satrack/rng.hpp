#ifndef SATRACK_RNG_HPP
#define SATRACK_RNG_HPP

#include <cstdint>

namespace satrack {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Order-sensitive combination of two 64-bit words into a stream id.
constexpr std::uint64_t hash64(std::uint64_t a, std::uint64_t b) noexcept
{
    return mix64(mix64(a + 0x9e3779b97f4a7c15ULL) ^ (b + 0x632be59bd9b4e019ULL));
}

/**
 * Counter-based generator state.
 *
 * Output i of substream (seed, stream_index) is a pure function of
 * (seed, stream_index, i), so sequences do not depend on thread layout or
 * on how many other streams were consumed. The state is a plain value:
 * copying it forks an identical continuation.
 */
class RngState {
  public:
    RngState() : RngState(0, 0) {}
    RngState(std::uint64_t seed, std::uint64_t stream_index);

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_index() const noexcept { return stream_; }
    std::uint64_t counter() const noexcept { return counter_; }

    std::uint64_t next_u64() noexcept
    {
        const std::uint64_t x = key_lo_ + (++counter_) * 0x9e3779b97f4a7c15ULL;
        return mix64(mix64(x) ^ key_hi_);
    }

    /// Uniform on the open interval (0, 1); 53 random bits.
    double next_uniform() noexcept
    {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Independent child stream; deterministic in (this stream, lane).
    RngState derive(std::uint64_t lane) const { return {seed_, hash64(stream_, lane)}; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t key_lo_;
    std::uint64_t key_hi_;
    std::uint64_t counter_ = 0;
};

/// Standard normal draw by inversion of a uniform; advances `state` by one.
double next_gaussian(RngState& state);

}  // namespace satrack

#endif  // SATRACK_RNG_HPP
