#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace pinlab {

// Substreams of one environment. Draws from different tags never share a key.
enum class Stream : std::uint32_t {
    strength = 1,
    position = 2,
    dynamics = 3,
    count = 4,
    percolation = 5,
    m_statistic = 6,
    m_statistic_nested = 7,
};

struct EnvironmentSeed {
    std::uint64_t seed = 0;
    Stream stream = Stream::strength;

    EnvironmentSeed with_stream(Stream s) const { return {seed, s}; }
};

// splitmix64 finalizer; a bijection on 64-bit words with full avalanche.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Hash of (seed, stream, coordinates...). Order of coordinates matters.
class CounterKey {
public:
    constexpr explicit CounterKey(EnvironmentSeed s) noexcept
        : state_(mix64(mix64(s.seed) ^ (static_cast<std::uint64_t>(s.stream) * 0xd6e8feb86659fd93ULL))) {}

    constexpr CounterKey with(std::int64_t coord) const noexcept {
        CounterKey k = *this;
        k.state_ = mix64(k.state_ ^ mix64(static_cast<std::uint64_t>(coord) + 0x632be59bd9b4e019ULL));
        return k;
    }

    constexpr CounterKey with(std::initializer_list<std::int64_t> coords) const noexcept {
        CounterKey k = *this;
        for (auto c : coords) k = k.with(c);
        return k;
    }

    constexpr std::uint64_t bits() const noexcept { return state_; }

private:
    std::uint64_t state_;
};

// Maps 64 random bits to the open interval (0, 1).
constexpr double unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Sequential draws indexed by a counter under a fixed key.
class CounterRng {
public:
    explicit CounterRng(CounterKey key, std::uint64_t counter = 0) noexcept
        : key_(key.bits()), counter_(counter) {}

    std::uint64_t next_u64() noexcept { return mix64(key_ ^ mix64(counter_++)); }
    double uniform() noexcept { return unit_open(next_u64()); }
    double exponential() noexcept { return -std::log(uniform()); }

    // Exact Poisson variate; large means are split into independent chunks.
    std::uint64_t poisson(double mean);

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

inline std::uint64_t CounterRng::poisson(double mean) {
    constexpr double chunk = 16.0;
    std::uint64_t total = 0;
    while (mean > 0.0) {
        const double mu = mean > chunk ? chunk : mean;
        mean -= mu;
        // inversion by sequential search
        double p = std::exp(-mu);
        double cdf = p;
        const double u = uniform();
        std::uint64_t k = 0;
        while (u > cdf && k < 1000) {
            ++k;
            p *= mu / static_cast<double>(k);
            cdf += p;
        }
        total += k;
    }
    return total;
}

}  // namespace pinlab
