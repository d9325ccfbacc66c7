#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace agora {

/// Portable seeded generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Standard distributions are implementation-defined, so bounded
/// draws use plain rejection sampling on the raw 64-bit output instead.
/// Every seeded choice in the library goes through this class, which makes
/// splits and random picks identical across compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }

    /// Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound);

    /// Uniform real in [0, 1) built from the top 53 bits.
    double unit();

    /// Partial Fisher-Yates: the first k entries of a uniform random
    /// permutation of [0, n).
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k);

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent sub-seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed for a per-item stream: mix64(seed ^ fnv1a64(key)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view key);

}  // namespace agora
