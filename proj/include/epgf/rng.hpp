#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace epgf {

// splitmix64; used to derive independent sub-stream seeds from one master
// seed so traces replay and transports stay interchangeable.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream_name) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : stream_name) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    std::uint64_t state = master ^ h;
    return splitmix64(state);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master ^ (0x51ed2701ab1cf6d5ULL + index * 0x9e3779b97f4a7c15ULL);
    return splitmix64(state);
}

// Deterministic uniform stream. mt19937_64 output is pinned by the
// standard; sampling goes through next_unit() only, so results are
// bit-stable across builds (no std::*_distribution involved).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        return static_cast<std::uint64_t>(next_unit() * static_cast<double>(n)) % n;
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace epgf
