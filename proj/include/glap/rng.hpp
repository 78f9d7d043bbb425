#pragma once

#include <cstdint>
#include <random>

namespace glap {

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for substream `stream` of master seed `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

/// Portable Gaussian source.
///
/// Bits come from std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Uniforms take the top 53 bits, u = (bits >> 11 + 0.5) * 2^-53,
/// so u is never 0 or 1. Normals use the Box-Muller transform and consume
/// both outputs of each pair (cosine branch first). std::*_distribution is
/// avoided because its output is implementation defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform();
    double normal();
    std::uint64_t bits() { return engine_(); }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace glap
