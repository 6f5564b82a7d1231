#pragma once

#include <cstdint>

namespace arbor {

// Documented default seed for every reproducible-by-default entry point.
inline constexpr std::uint64_t kDefaultSeed = 0x9e3779b97f4a7c15ull;

// SplitMix64 finalizer. Full-avalanche 64-bit mixer, used both to derive
// stream keys and as the output function of the counter generator below.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Counter-based generator: output(i) = mix64(key + i*golden). Streams derived
// from (seed, stream) are independent for distinct stream indices, so samples
// can be assigned to threads in any order without changing results.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(mix64(seed ^ 0x6a09e667f3bcc908ull) + mix64(stream)) {}

    std::uint64_t next_u64() noexcept { return mix64(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }

    // Uniform in [0,1), 53 random bits.
    double next_unit() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) noexcept { return next_unit() < p; }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace arbor
