#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <vector>

namespace rabc {

/// Deterministic, splittable random stream.
///
/// A stream is identified by a 64-bit seed plus a derivation path of 64-bit
/// ids. Identical (seed, path) pairs replay the identical draw sequence.
/// derive() produces substreams keyed by the extended path without consuming
/// state from the parent, so parallel workers can be handed substreams in any
/// order and the overall result stays bit-reproducible.
class RandomStream {
public:
    RandomStream() : RandomStream(0) {}

    explicit RandomStream(std::uint64_t seed, std::vector<std::uint64_t> path = {})
        : seed_(seed), path_(std::move(path)) {
        reset_state();
    }

    /// Substream with `ids` appended to this stream's path. Does not advance
    /// the parent's state.
    [[nodiscard]] RandomStream derive(std::initializer_list<std::uint64_t> ids) const {
        std::vector<std::uint64_t> p = path_;
        p.insert(p.end(), ids.begin(), ids.end());
        return RandomStream(seed_, std::move(p));
    }

    std::uint64_t seed() const { return seed_; }
    const std::vector<std::uint64_t>& path() const { return path_; }

    std::uint64_t next_u64() {
        // xoshiro256++
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    /// Uniform draw on the open interval (0,1); safe to feed through
    /// inverse-CDF transforms.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Unbiased index in {0, ..., n-1} (n > 0) via rejection on the top range.
    std::size_t uniform_index(std::size_t n) {
        const std::uint64_t bound = n;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x = next_u64();
        while (x >= limit) x = next_u64();
        return static_cast<std::size_t>(x % bound);
    }

    double normal();  // standard normal via inverse CDF (defined in random.cpp)
    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double scale) { return -scale * std::log(uniform()); }

    double laplace(double location, double scale) {
        const double u = uniform() - 0.5;
        const double x = -std::log(1.0 - 2.0 * std::abs(u));
        return location + scale * (u < 0.0 ? -x : x);
    }

    /// Gamma(shape, 1) for shape >= 1 (Marsaglia-Tsang squeeze).
    double gamma(double shape);

private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }

    static std::uint64_t mix64(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    void reset_state() {
        std::uint64_t key = mix64(seed_ ^ 0x6a09e667f3bcc908ULL);
        for (std::uint64_t id : path_) key = mix64(key ^ mix64(id + 0x9e3779b97f4a7c15ULL));
        for (auto& s : s_) {
            key = mix64(key);
            s = key;
        }
        if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x1ULL;
    }

    std::uint64_t seed_;
    std::vector<std::uint64_t> path_;
    std::array<std::uint64_t, 4> s_{};
};

}  // namespace rabc
