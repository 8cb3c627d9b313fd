#pragma once

#include <cmath>
#include <cstdint>

namespace traplab {

// Counter-based generator: each draw mixes (key, counter) through the
// SplitMix64 finalizer, so streams keyed by (seed, stream id) are
// independent and reproducible regardless of scheduling. All variate
// transformations are done by hand; implementation-defined std::
// distributions would break the byte-identity contract.
class CounterRng {
public:
    CounterRng() : key_(0x9e3779b97f4a7c15ull), ctr_(0) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(mix(seed + 0x9e3779b97f4a7c15ull) ^ mix(stream + 0xbf58476d1ce4e5b9ull))),
          ctr_(0) {}

    std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

    // Uniform on (0,1); never returns 0 so log(u) is always finite.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * (1.0 / 9007199254740992.0);
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
    }

    // Standard normal via Box-Muller (second value cached).
    double normal() {
        if (have_cache_) {
            have_cache_ = false;
            return cache_;
        }
        double u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * 3.14159265358979323846 * u2;
        cache_ = r * std::sin(a);
        have_cache_ = true;
        return r * std::cos(a);
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    std::uint64_t counter() const { return ctr_; }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xbf58476d1ce4e5b9ull;
        z ^= z >> 27;
        z *= 0x94d049bb133111ebull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t ctr_;
    bool have_cache_ = false;
    double cache_ = 0.0;
};

}  // namespace traplab
