#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace panelfx {

/// splitmix64 step, also used to derive independent sub-seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ splitmix64(b + 0x632be59bd9b4e019ull));
}

/// Deterministic RNG: the mt19937_64 stream is pinned by the standard, and
/// all variate transforms are spelled out here rather than delegated to the
/// implementation-defined std:: distributions. Same seed, same draws,
/// everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t bits() { return gen_(); }

    /// Uniform on (0, 1].
    double uniform() {
        return (double((gen_() >> 11)) + 1.0) * 0x1.0p-53;
    }

    /// Box-Muller; uses two uniforms per call.
    double normal(double mean = 0.0, double sd = 1.0) {
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        return mean + sd * r * std::cos(2.0 * M_PI * u2);
    }

    double exponential(double mean) { return -mean * std::log(uniform()); }

    bool bernoulli(double p) { return uniform() <= p; }

    /// Uniform integer in [0, n). Modulo bias is negligible for n << 2^64.
    std::uint64_t below(std::uint64_t n) { return gen_() % n; }

private:
    std::mt19937_64 gen_;
};

} // namespace panelfx
