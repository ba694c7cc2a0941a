#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace montage {

// Deterministic generator with platform-independent output. std::shuffle and
// uniform_int_distribution are implementation-defined, so bounded draws and
// shuffles are done by hand on top of splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Unbiased draw in [0, n) via rejection.
    std::uint64_t below(std::uint64_t n);

    // Uniform double in [0, 1).
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::uint64_t state_;
};

// Named substream derivation: every random draw in the pipeline flows from one
// root seed through a stream label, so changing the root changes everything.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream);

} // namespace montage
