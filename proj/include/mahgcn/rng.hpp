#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace mahgcn {

// splitmix64 finalizer; also the step function of Rng below. Chosen over
// std:: engines because its output is pinned bit-for-bit by the algorithm,
// which the reproducibility contract needs.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Fixed role constants; every stochastic consumer gets its own child stream
// via derive_stream(base, role, index) so streams never alias.
namespace seed_role {
inline constexpr std::uint64_t init = 0x696e69745f726e67ULL;
inline constexpr std::uint64_t shuffle = 0x73687566666c6530ULL;
inline constexpr std::uint64_t dropout = 0x64726f706f757430ULL;
inline constexpr std::uint64_t split = 0x73706c69745f3030ULL;
inline constexpr std::uint64_t fold = 0x666f6c645f303030ULL;
inline constexpr std::uint64_t synth = 0x73796e7468657369ULL;
inline constexpr std::uint64_t sample = 0x73616d706c655f30ULL;
}  // namespace seed_role

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; one spare cached per pair.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = 1.0 - uniform();  // (0, 1]
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    // Unbiased integer in [0, n) by rejection.
    std::size_t index(std::size_t n) {
        if (n <= 1) return 0;
        std::uint64_t limit = ~0ULL - (~0ULL % n + 1) % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x > limit);
        return static_cast<std::size_t>(x % n);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

inline Rng derive_stream(std::uint64_t base, std::uint64_t role, std::uint64_t index = 0) {
    return Rng(splitmix64(base ^ role ^ index));
}

}  // namespace mahgcn
