#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace fairmatch {

/// Stream tags used when deriving per-trial and per-replicate seeds.
enum class Stream : std::uint64_t {
    arrivals = 0xA441,
    policy = 0xB0C5,
    plan = 0x91A7,
    instance = 0x1257,
    weights = 0x3E16,
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Hash a master seed together with a path of indices into an independent seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept;

/// Seeded random source with platform-independent draws.
///
/// std::mt19937_64 output is fully specified by the standard; the
/// distributions in <random> are not, so the conversions live here.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Unbiased integer in [0, n). n must be positive.
    std::uint64_t index(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 engine_;
};

} // namespace fairmatch
