#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace montage {

// FNV-1a, 64-bit. Used for request hashes, config fingerprints and seed
// derivation; stability across platforms matters more than strength here.
constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

constexpr std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = kFnvOffset) {
    for (unsigned char c : data) {
        h ^= static_cast<std::uint64_t>(c);
        h *= kFnvPrime;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

} // namespace montage
