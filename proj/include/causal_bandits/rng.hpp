#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>

namespace causal_bandits {

// Seeded 64-bit Mersenne Twister with portable conversions to uniform,
// Bernoulli, categorical and normal draws. std:: distributions are
// implementation-defined, so they are avoided to keep trials bit-reproducible
// across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix(seed)) {}

    std::uint64_t next() { return engine_(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    std::size_t categorical(std::span<const double> probabilities) {
        const double u = uniform();
        double cumulative = 0.0;
        std::size_t last_positive = 0;
        for (std::size_t i = 0; i < probabilities.size(); ++i) {
            if (probabilities[i] <= 0.0) continue;
            last_positive = i;
            cumulative += probabilities[i];
            if (u < cumulative) return i;
        }
        // rows summing to 1 - 1e-12 leave a sliver of mass at the top
        return last_positive;
    }

    // Box-Muller; always consumes exactly two uniforms.
    double normal(double mean, double stddev) {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        return mean + stddev * radius * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 engine_;
};

}  // namespace causal_bandits
