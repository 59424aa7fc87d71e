#ifndef ARCTIC_RNG_HPP
#define ARCTIC_RNG_HPP

#include <cstdint>

namespace arctic {

// Counter-based pseudorandom stream.  Each draw is a stateless hash of
// (seed, stream, counter), so coupled Markov chains can replay the same
// update sequence without storing it, and split streams never collide.
// The mixer is the SplitMix64 finalizer applied to a Weyl sequence.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(seed ^ 0x9e3779b97f4a7c15ull) ^ mix(stream + 0xbf58476d1ce4e5b9ull)),
          counter_(0) {}

    // Stream with the same seed and a different index.
    RngStream split(std::uint64_t stream) const {
        RngStream r;
        r.key_ = mix(key_ ^ mix(stream + 0x94d049bb133111ebull));
        r.counter_ = 0;
        return r;
    }

    std::uint64_t next_u64() { return at(counter_++); }

    // Value of draw `i` without advancing the stream.
    std::uint64_t at(std::uint64_t i) const {
        std::uint64_t z = key_ + (i + 1) * 0x9e3779b97f4a7c15ull;
        return mix(z);
    }

    std::uint64_t counter() const { return counter_; }
    void seek(std::uint64_t counter) { counter_ = counter; }

    // Unbiased uniform integer in [0, n) via multiply-shift rejection.
    std::uint64_t uniform_below(std::uint64_t n) {
        // Lemire's method.
        std::uint64_t x = next_u64();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        std::uint64_t l = static_cast<std::uint64_t>(m);
        if (l < n) {
            std::uint64_t t = (0 - n) % n;
            while (l < t) {
                x = next_u64();
                m = static_cast<__uint128_t>(x) * n;
                l = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

    bool next_bit() { return (next_u64() >> 63) != 0; }

    // Uniform double in [0, 1).
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

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
    std::uint64_t counter_;
};

}  // namespace arctic

#endif
