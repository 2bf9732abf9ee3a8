#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>

namespace modfoot {

/// Counter-based generator: draw i of a stream with key k is
/// splitmix64_mix(k + (i + 1) * golden_gamma). Streams are cheap values; a
/// stream for a (purpose, id, ...) tuple is obtained with Rng::derive, so no
/// generator state is ever shared between jobs. Output depends only on the
/// key and counter, never on the platform's standard-library distributions.
class Rng {
public:
    explicit Rng(std::uint64_t key, std::uint64_t counter = 0) : key_(key), counter_(counter) {}

    static Rng derive(std::initializer_list<std::uint64_t> parts);

    std::uint64_t next_u64();
    /// Uniform in the open interval (0, 1); 53-bit resolution.
    double uniform();
    double uniform(double lo, double hi);
    /// Standard normal deviate (Box-Muller, two draws per call).
    double normal();
    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    std::uint64_t key() const { return key_; }
    std::uint64_t counter() const { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

std::uint64_t mix64(std::uint64_t z);
std::uint64_t combine_keys(std::initializer_list<std::uint64_t> parts);
/// FNV-1a over the bytes of the text; stable across platforms and runs.
std::uint64_t hash_text(std::string_view text);

}  // namespace modfoot
