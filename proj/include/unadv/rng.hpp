#ifndef UNADV_RNG_HPP
#define UNADV_RNG_HPP

#include <cstdint>
#include <cmath>
#include <random>
#include <string_view>

namespace unadv {

// The mt19937_64 engine is bit-exact across platforms; the std:: distributions
// are not, so every draw below is hand-rolled on top of raw engine output.
class Rng {
public:
    explicit Rng(uint64_t seed) : engine_(seed) {}

    uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n). Fixed-point multiply; bias is 2^-64 per draw.
    int64_t below(int64_t n) {
        return static_cast<int64_t>((static_cast<unsigned __int128>(next_u64()) *
                                     static_cast<unsigned __int128>(n)) >> 64);
    }

    // Standard normal via Box-Muller; two uniforms per draw, no cached state.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    // Knuth's product method; lambda stays small (< ~100) in this codebase.
    int poisson(double lambda) {
        const double limit = std::exp(-lambda);
        double prod = 1.0;
        int k = 0;
        do {
            ++k;
            prod *= uniform();
        } while (prod > limit);
        return k - 1;
    }

private:
    std::mt19937_64 engine_;
};

// 64-bit FNV-1a, used for config digests and manifest content digests.
inline uint64_t fnv1a64(const void* bytes, size_t len) {
    const unsigned char* p = static_cast<const unsigned char*>(bytes);
    uint64_t h = 0xcbf29ce484222325ull;
    for (size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

inline uint64_t fnv1a64(std::string_view s) { return fnv1a64(s.data(), s.size()); }

// splitmix64 finalizer; the standard avalanche mix.
inline uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Deterministic seed fan-out: fan_seed(top, stage, i) feeds one pipeline
// stage. Adding stages never perturbs the streams of existing ones.
inline uint64_t fan_seed(uint64_t top_seed, std::string_view stage, uint64_t index = 0) {
    return mix64(mix64(top_seed ^ fnv1a64(stage)) + index);
}

} // namespace unadv

#endif
