#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fedsb {

/// SplitMix64 finalizer. Fixed across platforms; the basis of all seed
/// derivation in this project.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Deterministic seed combiner: mix_seed(mix_seed(master, a), b) gives the
/// stream seed for the (a, b) slot. Documented in the README; tests and
/// external oracles reproduce schedules through this function.
constexpr std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t value) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL + splitmix64(value)));
}

/// Purpose tags keeping independent random streams apart.
namespace seed_salt {
constexpr std::uint64_t task = 0x01;
constexpr std::uint64_t model_init = 0x02;
constexpr std::uint64_t client = 0x03;
constexpr std::uint64_t resample = 0x04;
constexpr std::uint64_t shuffle = 0x05;
constexpr std::uint64_t run = 0x06;
} // namespace seed_salt

/// Seed of client `client_id`'s training stream in communication round
/// `round`: mix(mix(mix(master, client_salt), client_id), round).
constexpr std::uint64_t client_round_seed(std::uint64_t master_seed,
                                          std::uint64_t client_id,
                                          std::uint64_t round) {
    return mix_seed(mix_seed(mix_seed(master_seed, seed_salt::client), client_id), round);
}

/// mt19937_64 engine with explicit output transforms. The engine is pinned
/// by the standard; the transforms below avoid the implementation-defined
/// std:: distributions so identical seeds give identical draws everywhere.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1), 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    /// Standard normal via Box-Muller; consumes exactly two draws per call.
    double normal() {
        double u1 = static_cast<double>((engine_() >> 11) + 1) * 0x1.0p-53; // (0, 1]
        double u2 = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    /// Unbiased uniform integer in [0, n); n must be nonzero.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = (UINT64_MAX / n) * n;
        std::uint64_t x = engine_();
        while (x >= limit) x = engine_();
        return x % n;
    }

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[static_cast<std::size_t>(below(i))]);
        }
    }

private:
    std::mt19937_64 engine_;
};

} // namespace fedsb
