#pragma once
#include <cstdint>
#include <vector>

namespace asbf {

/// Deterministic counter-based pseudo-random stream (SplitMix64).
///
/// Streams are derived from a (master seed, tag) pair, never from global
/// state, so the draws consumed by tree b are the same no matter how many
/// threads fit the forest or in which order trees finish. A stream is
/// single-owner: one per tree or per purpose.
class RngStream {
public:
    explicit RngStream(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64();

    /// Uniform on [0,1), 53-bit resolution.
    double next_double();

    /// Uniform on (0,1]; safe as a log() argument.
    double next_open_double();

    /// Uniform integer in [0, bound), bound >= 1. Unbiased (Lemire).
    std::uint64_t next_below(std::uint64_t bound);

    int next_int(int bound) { return static_cast<int>(next_below(static_cast<std::uint64_t>(bound))); }

    /// Standard normal via Box-Muller; consumes exactly two draws.
    double next_normal();

    bool next_bernoulli(double p) { return next_double() < p; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

/// Stateless seed derivation: distinct tags give decorrelated streams and the
/// result depends only on (seed, tag).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag);

RngStream derive_stream(std::uint64_t seed, std::uint64_t tag);

}  // namespace asbf
