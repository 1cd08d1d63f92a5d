#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace roska {

/// Counter-based deterministic random stream.
///
/// Every consumer of randomness derives its own stream from a key path
/// (seed, round, candidate, purpose, ...). Draw i of a stream depends only on
/// (key, i), so concurrent consumers cannot perturb each other and replays are
/// bit-identical regardless of evaluation order.
class RngStream {
public:
    RngStream() = default;
    explicit RngStream(std::uint64_t key) : key_(key) {}

    /// Child stream for a sub-purpose; chain ids left to right.
    static std::uint64_t derive(std::uint64_t parent, std::initializer_list<std::uint64_t> ids) {
        std::uint64_t k = finalize(parent ^ 0xa0761d6478bd642fULL);
        for (std::uint64_t id : ids) k = finalize(k + 0x9e3779b97f4a7c15ULL * (id + 1));
        return k;
    }

    static RngStream from(std::uint64_t parent, std::initializer_list<std::uint64_t> ids) {
        return RngStream(derive(parent, ids));
    }

    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() { return at(counter_++); }

    /// Uniform in [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes two uniforms per draw.
    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log1p(-u1));  // 1-u1 in (0,1]
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

    /// Uniform integer in [0, n); n must be >= 1.
    std::uint64_t uniform_int(std::uint64_t n) {
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

private:
    // SplitMix64 output function over key + (counter+1)*golden.
    std::uint64_t at(std::uint64_t counter) const {
        return finalize(key_ + (counter + 1) * 0x9e3779b97f4a7c15ULL);
    }

    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

/// Stable ids for the purpose component of key paths.
namespace stream {
inline constexpr std::uint64_t kEnvInit = 1;
inline constexpr std::uint64_t kActionNoise = 2;
inline constexpr std::uint64_t kShuffle = 3;
inline constexpr std::uint64_t kParamInit = 4;
inline constexpr std::uint64_t kMutate = 5;
inline constexpr std::uint64_t kEval = 6;
inline constexpr std::uint64_t kGenerate = 7;
inline constexpr std::uint64_t kTheta0 = 8;
inline constexpr std::uint64_t kBo = 9;
}  // namespace stream

}  // namespace roska
