#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace sparselab {

/// Deterministic 64-bit PRNG (xoshiro256++ seeded through splitmix64).
/// No global state anywhere: every consumer owns its Rng value, and an
/// identical seed plus identical call sequence reproduces the exact same
/// stream on every platform. Gaussians use Box-Muller on two uniforms so
/// the draw count per call is fixed (unlike std::normal_distribution,
/// whose algorithm is implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed) {
        std::uint64_t x = seed;
        for (auto& s : state_) s = splitmix64(x);
    }

    /// Derive an independent stream, e.g. one per (seed, run) pair.
    static Rng substream(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t x = seed;
        std::uint64_t a = splitmix64(x);
        return Rng(a ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t draws() const { return draws_; }

    /// Full serializable state; restoring reproduces the stream exactly.
    struct Snapshot {
        std::uint64_t state[4];
        std::uint64_t seed;
        std::uint64_t draws;
    };

    Snapshot snapshot() const {
        Snapshot s{{state_[0], state_[1], state_[2], state_[3]}, seed_, draws_};
        return s;
    }

    static Rng restore(const Snapshot& s) {
        Rng r(s.seed);
        for (int i = 0; i < 4; ++i) r.state_[i] = s.state[i];
        r.draws_ = s.draws;
        return r;
    }

    std::uint64_t next_u64() {
        ++draws_;
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    bool coin() { return (next_u64() >> 63) != 0; }

    /// Standard normal via Box-Muller; consumes exactly two uniforms.
    double gaussian() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();  // avoid log(0)
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

    /// Fisher-Yates shuffle with this stream.
    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static std::uint64_t splitmix64(std::uint64_t& x) {
        x += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = x;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    std::uint64_t seed_ = 0;
    std::uint64_t draws_ = 0;
};

}  // namespace sparselab
