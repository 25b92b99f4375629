#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace entail {

std::string_view trim(std::string_view s);
std::string lower(std::string_view s);

/// Splits on a single-character separator; keeps empty pieces.
std::vector<std::string_view> split(std::string_view s, char sep);

/// FNV-1a, the project-wide stable hash (std::hash is not stable across
/// implementations and these hashes end up in cache files and embeddings).
constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
constexpr std::uint64_t kFnvPrime = 1099511628211ull;

constexpr std::uint64_t fnv1a(std::string_view data,
                              std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= kFnvPrime;
    }
    return h;
}

constexpr std::uint64_t fnv1a_u64(std::uint64_t value,
                                  std::uint64_t seed = kFnvOffset) {
    std::uint64_t h = seed;
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xff;
        h *= kFnvPrime;
    }
    return h;
}

std::string hex64(std::uint64_t value);

}  // namespace entail
