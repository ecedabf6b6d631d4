#pragma once

#include <cstdint>
#include <random>

namespace copadapt {

// mt19937_64 is fully specified by the standard, so streams are portable.
// Only std::uniform/normal distributions are implementation defined; the
// helpers below avoid them.
using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Child seed for stream `stream` of `master`. Used for per-chain,
// per-replication and per-row generators so results never depend on
// scheduling order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(master) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b) noexcept {
    return derive_seed(derive_seed(master, a), b);
}

// Uniform on the open interval (0, 1).
inline double uniform01(Rng& rng) noexcept {
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

// Standard normal via inversion, one uniform per draw.
double standard_normal(Rng& rng);

// Gamma(shape, 1) via Marsaglia-Tsang.
double gamma_draw(Rng& rng, double shape);

}  // namespace copadapt
