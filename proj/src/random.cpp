#include "agora/random.hpp"

#include <limits>
#include <numeric>
#include <stdexcept>

#include "agora/hash.hpp"

namespace agora {

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    // Largest multiple of bound representable; draws above it are rejected.
    const std::uint64_t limit = kMax - (kMax % bound + 1) % bound;
    std::uint64_t x = engine_();
    while (x > limit) x = engine_();
    return x % bound;
}

double Rng::unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(below(n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view key) {
    return mix64(seed ^ fnv1a64(key));
}

}  // namespace agora
