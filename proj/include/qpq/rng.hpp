#pragma once

#include <cmath>
#include <cstdint>

namespace qpq {

/// splitmix64 finalizer; the workhorse behind CounterRng and stream derivation.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ull;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebull;
    x ^= x >> 31;
    return x;
}

/**
 * CounterRng — counter-based PRNG.
 *
 * Output i is a hash of (key, i), so a generator is fully determined by its
 * key and can be reconstructed for any (seed, stream) pair. Experiment trials
 * each get their own derived key, which makes parallel runs order-independent
 * and bitwise reproducible.
 */
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key = 0) : key_(mix64(key + kGolden)) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream) : CounterRng(derive(seed, stream)) {}

    /// Hash two values into a new stream key. Chain to derive nested streams.
    static std::uint64_t derive(std::uint64_t a, std::uint64_t b) {
        return mix64(a ^ mix64(b + kGolden));
    }

    std::uint64_t next_u64() { return mix64(key_ + kGolden * ++counter_); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n). n must be nonzero.
    std::uint64_t uniform_index(std::uint64_t n) {
        return std::uint64_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    bool bernoulli(double p) { return uniform() < p; }

    /// Standard normal via Box-Muller; the second sample of each pair is cached.
    double gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace qpq
