#pragma once

#include <cstdint>
#include <limits>

namespace dvz {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Stream identifiers. Each consumer draws from its own stream so that adding
// draws in one place never shifts another.
enum class Stream : std::uint64_t {
    omega = 1,
    region = 2,
    inner_mc = 3,
    oracle = 4,
    stratified = 5,
};

/// Counter-based uniform stream: the value at `index` depends only on
/// (seed, stream, index). There is no hidden state to advance.
class CounterStream {
public:
    constexpr CounterStream(std::uint64_t seed, Stream stream) noexcept
        : key_(splitmix64(splitmix64(seed) ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL)))
    {
    }

    constexpr CounterStream(std::uint64_t seed, Stream stream, std::uint64_t substream) noexcept
        : CounterStream(seed ^ splitmix64(substream + 0x5851F42D4C957F2DULL), stream)
    {
    }

    constexpr std::uint64_t bits(std::uint64_t index) const noexcept
    {
        return splitmix64(key_ ^ splitmix64(index));
    }

    /// Uniform double in [0, 1) with 53 random bits.
    constexpr double uniform(std::uint64_t index) const noexcept
    {
        return static_cast<double>(bits(index) >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t key_;
};

/// Sequential adaptor over a CounterStream that satisfies UniformRandomBitGenerator.
class StreamEngine {
public:
    using result_type = std::uint64_t;

    constexpr StreamEngine(CounterStream stream, std::uint64_t start = 0) noexcept
        : stream_(stream), counter_(start)
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept { return stream_.bits(counter_++); }
    constexpr double uniform() noexcept { return stream_.uniform(counter_++); }
    constexpr std::uint64_t position() const noexcept { return counter_; }

private:
    CounterStream stream_;
    std::uint64_t counter_;
};

} // namespace dvz
