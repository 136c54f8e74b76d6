#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace zipsel::rng {

// mt19937_64 output is fully specified by the standard; the draw helpers
// below avoid std::*_distribution, whose mappings are implementation
// defined, so seeded streams replay identically across toolchains.
using Engine = std::mt19937_64;

inline std::uint64_t bounded(Engine& engine, std::uint64_t n) {
    return engine() % n;
}

inline double unit(Engine& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

inline double gaussian(Engine& engine, double mean, double sigma) {
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = unit(engine);
    double u2 = unit(engine);
    double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + sigma * z;
}

} // namespace zipsel::rng
