#pragma once

#include <cmath>
#include <cstdint>

namespace sbt {

// Random streams, algorithm version "sbt-rng-1":
//   key    = SplitMix64 chain over (seed, stream, counter)
//   stream = xoshiro256** seeded from SplitMix64(key)
//   normal = Marsaglia polar method
//   gamma  = Marsaglia-Tsang squeeze (shape >= 1), boosted for shape < 1
// Only IEEE arithmetic plus std::log/std::sqrt/std::pow is used so that
// output is reproducible across conforming platforms.
inline constexpr const char* rng_algorithm = "sbt-rng-1";

constexpr std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    std::uint64_t s = seed;
    std::uint64_t k = splitmix64_next(s);
    s = k ^ (stream * 0xD1B54A32D192ED03ULL);
    k = splitmix64_next(s);
    s = k ^ (counter * 0x8CB92BA72F3D8DD7ULL);
    return splitmix64_next(s);
}

class Xoshiro256 {
public:
    explicit constexpr Xoshiro256(std::uint64_t seed) {
        for (auto& w : s_) w = splitmix64_next(seed);
    }

    // Raw state, for checking against reference vectors.
    static constexpr Xoshiro256 from_state(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
        Xoshiro256 x(0);
        x.s_[0] = a;
        x.s_[1] = b;
        x.s_[2] = c;
        x.s_[3] = d;
        return x;
    }

    constexpr std::uint64_t next() {
        const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // Uniform on [0, 1).
    constexpr double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double normal() {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    // Gamma(shape, 1).
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform();
            while (u == 0.0) u = uniform();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform();
            const double x2 = x * x;
            if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4]{};
};

}  // namespace sbt
