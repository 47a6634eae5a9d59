#include "mgv/rng.hpp"

#include <cmath>

namespace mgv {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t fnv1a(std::string_view s) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace

Rng Rng::substream(std::string_view label) const {
    return Rng(splitmix64(seed_ ^ fnv1a(label)));
}

Rng Rng::substream(std::string_view label, std::uint64_t index) const {
    return Rng(splitmix64(splitmix64(seed_ ^ fnv1a(label)) + index));
}

double Rng::uniform() {
    // 53 random bits -> [0,1); independent of the standard library's
    // distribution implementation.
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

bool Rng::bernoulli(double p) { return uniform() < p; }

double Rng::normal(double mean, double stddev) {
    // Box-Muller with both uniforms always consumed.
    double u1 = uniform();
    const double u2 = uniform();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
}

std::size_t Rng::index(std::size_t n) {
    if (n == 0) return 0;
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) % n;
}

}  // namespace mgv
