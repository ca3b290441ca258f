#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace citembed {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Seeded RNG with named sub-streams. Every piece of randomness in the
// pipeline derives from (global seed, stream name[, key]) so reruns of a
// single stage reproduce exactly, independent of what ran before it.
// Distribution helpers are hand-rolled: std::* distributions are
// implementation-defined and would break byte-identical reruns across
// standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : gen_(seed) {}

    static Rng stream(uint64_t seed, std::string_view name) {
        return Rng(splitmix64(mix(splitmix64(seed) ^ kFnvOffset, name)));
    }

    static Rng stream(uint64_t seed, std::string_view name, std::string_view key) {
        uint64_t h = mix(splitmix64(seed) ^ kFnvOffset, name);
        h = mix(splitmix64(h), key);
        return Rng(splitmix64(h));
    }

    static Rng stream(uint64_t seed, std::string_view name, uint64_t key) {
        uint64_t h = mix(splitmix64(seed) ^ kFnvOffset, name);
        return Rng(splitmix64(splitmix64(h) ^ splitmix64(key)));
    }

    uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller (uncached).
    double next_normal() {
        double u1 = 1.0 - next_unit();  // (0, 1], keeps log finite
        double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    // Uniform in {0, ..., n-1}, unbiased via rejection.
    size_t next_index(size_t n) {
        assert(n > 0);
        uint64_t span = static_cast<uint64_t>(n);
        uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return static_cast<size_t>(x % span);
    }

    // Fisher-Yates.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[next_index(i)]);
        }
    }

private:
    static constexpr uint64_t kFnvOffset = 0xcbf29ce484222325ull;

    static uint64_t mix(uint64_t h, std::string_view s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ull;
        }
        return h;
    }

    std::mt19937_64 gen_;
};

}  // namespace citembed
