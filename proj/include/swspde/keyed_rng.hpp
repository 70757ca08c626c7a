#pragma once

// Counter-based keyed random numbers. Every draw is a pure function of a key
// and a tuple of integer coordinates, so any slot of any random field can be
// regenerated in isolation and in any order.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace swspde::rng {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t combine(std::uint64_t h, std::uint64_t v) noexcept {
    return splitmix64(h ^ splitmix64(v + 0x632BE59BD9B4E019ULL));
}

/// Derives a child key from a parent key and any number of integer coordinates.
template <typename... Parts>
constexpr std::uint64_t derive(std::uint64_t key, Parts... parts) noexcept {
    std::uint64_t h = splitmix64(key);
    ((h = combine(h, static_cast<std::uint64_t>(parts))), ...);
    return h;
}

/// Maps 64 random bits to the open interval (0, 1).
constexpr double to_unit_open(std::uint64_t bits) noexcept {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal deviate that depends only on `key` (Box-Muller, cosine branch).
inline double gaussian_at(std::uint64_t key) noexcept {
    const double u1 = to_unit_open(splitmix64(key));
    const double u2 = to_unit_open(splitmix64(key ^ 0xD1B54A32D192ED03ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

/// Sequential stream over a fixed key: draw n is splitmix64(key + n * golden).
class KeyedStream {
public:
    explicit KeyedStream(std::uint64_t key) noexcept : key_(key) {}

    std::uint64_t next_u64() noexcept {
        ++counter_;
        return splitmix64(key_ + counter_ * kGolden);
    }
    double uniform() noexcept { return to_unit_open(next_u64()); }
    double exponential(double rate) noexcept { return -std::log(uniform()) / rate; }
    double normal() noexcept { return gaussian_at(next_u64()); }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace swspde::rng
