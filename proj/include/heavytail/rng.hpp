#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace heavytail::rng {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t stream_key(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream ^ 0xD1B54A32D192ED03ULL));
}

// Counter-based stream: the i-th output depends only on (key, i).
struct Stream {
    std::uint64_t key;
    std::uint64_t counter = 0;

    std::uint64_t next_u64() { return mix64(key ^ mix64(counter++)); }

    // Uniform in (0, 1), 53-bit.
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    // Two independent standard normals from one 64-bit draw (Box-Muller on
    // two 32-bit halves).
    void normal_pair(double& z0, double& z1) {
        std::uint64_t b = next_u64();
        double u1 = (static_cast<double>(b >> 32) + 0.5) * 0x1.0p-32;
        double u2 = (static_cast<double>(b & 0xFFFFFFFFULL) + 0.5) * 0x1.0p-32;
        double r = std::sqrt(-2.0 * std::log(u1));
        double th = 2.0 * std::numbers::pi * u2;
        z0 = r * std::cos(th);
        z1 = r * std::sin(th);
    }

    // Fills out[0..n) with standard normals; always consumes ceil(n/2) draws.
    void normals(double* out, int n) {
        int i = 0;
        for (; i + 1 < n; i += 2) normal_pair(out[i], out[i + 1]);
        if (i < n) {
            double spare;
            normal_pair(out[i], spare);
        }
    }
};

}  // namespace heavytail::rng
