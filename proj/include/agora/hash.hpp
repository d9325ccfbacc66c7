#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace agora {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = kFnvOffset;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnvPrime;
    }
    return h;
}

/// Lowercase hex SHA-256 of the given bytes.
std::string sha256_hex(std::string_view bytes);

/// sha256_hex of a whole file; throws Error(IoFailure) if unreadable.
std::string sha256_file(const std::string& path);

}  // namespace agora
