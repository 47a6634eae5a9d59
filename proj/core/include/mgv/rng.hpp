#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mgv {

/// Seedable random stream. Every stochastic operation in the library takes
/// one of these by reference; nothing reads global state.
///
/// Named substreams are derived by hashing the parent seed with a label, so
/// adding a new consumer never shifts the draws seen by existing ones.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }

    /// Independent stream keyed by (seed, label).
    Rng substream(std::string_view label) const;
    Rng substream(std::string_view label, std::uint64_t index) const;

    double uniform();                          // [0, 1)
    bool bernoulli(double p);                  // exactly one uniform draw
    double normal(double mean = 0.0, double stddev = 1.0);
    std::size_t index(std::size_t n);          // uniform in [0, n)

    std::mt19937_64& engine() noexcept { return engine_; }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace mgv
