#ifndef CZK_RNG_HPP_
#define CZK_RNG_HPP_

#include <cstdint>
#include <string_view>

namespace czk {

// 64-bit finalizer used everywhere randomness or hashing is derived.
// mix64 is the only mixing primitive in the project so that every value
// is bit-exact reproducible from the master seed.
inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0x9E3779B97F4A7C15ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    x ^= x >> 31;
    return x;
}

// Chain step: absorb one word into a running digest.
inline std::uint64_t chain(std::uint64_t h, std::uint64_t w) {
    return mix64(h ^ mix64(w + 0x9E3779B97F4A7C15ULL));
}

inline std::uint64_t chain_bytes(std::uint64_t h, const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t w = 0;
    std::size_t i = 0;
    for (; i < len; ++i) {
        w |= static_cast<std::uint64_t>(p[i]) << (8 * (i % 8));
        if (i % 8 == 7) { h = chain(h, w); w = 0; }
    }
    if (len % 8 != 0 || len == 0) h = chain(h, w ^ (len * 0x0101010101010101ULL));
    return h;
}

inline std::uint64_t chain_str(std::uint64_t h, std::string_view s) {
    return chain_bytes(h, s.data(), s.size());
}

// Seed derivation: a labelled path below a parent seed. All component
// seeds (verifier tapes, commitment randomness, trial seeds) hang off the
// single run seed through derive() so partial reruns are reproducible.
inline std::uint64_t derive(std::uint64_t seed, std::string_view label) {
    return chain_str(chain(0x243F6A8885A308D3ULL, seed), label);
}
inline std::uint64_t derive(std::uint64_t seed, std::string_view label, std::uint64_t index) {
    return chain(derive(seed, label), index);
}
inline std::uint64_t derive(std::uint64_t seed, std::string_view label, std::uint64_t i, std::uint64_t j) {
    return chain(chain(derive(seed, label), i), j);
}

// Counter-based deterministic stream (splitmix64).
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    // Uniform in [0, n). n must be nonzero. Uses rejection to stay unbiased.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = n * ((~std::uint64_t{0}) / n);
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    // Bernoulli(p) as an exact 64-bit threshold comparison; no floating
    // point enters a protocol decision.
    bool coin(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        const auto threshold = static_cast<std::uint64_t>(p * 18446744073709551616.0);
        return next() < threshold;
    }

    double uniform01() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

}  // namespace czk

#endif  // CZK_RNG_HPP_
