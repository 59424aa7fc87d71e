#ifndef ARCTIC_BIGINT_HPP
#define ARCTIC_BIGINT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "arctic/rng.hpp"

namespace arctic {

// Unsigned arbitrary-precision integer, little-endian 64-bit limbs.
// Only the operations needed for exact tiling counts and uniform
// backward sampling are provided.
class BigUint {
public:
    BigUint() = default;
    BigUint(std::uint64_t v) {  // NOLINT(google-explicit-constructor)
        if (v != 0) limbs_.push_back(v);
    }

    bool is_zero() const { return limbs_.empty(); }

    BigUint& operator+=(const BigUint& o) {
        if (limbs_.size() < o.limbs_.size()) limbs_.resize(o.limbs_.size(), 0);
        unsigned __int128 carry = 0;
        for (std::size_t i = 0; i < limbs_.size(); ++i) {
            unsigned __int128 s = carry + limbs_[i];
            if (i < o.limbs_.size()) s += o.limbs_[i];
            limbs_[i] = static_cast<std::uint64_t>(s);
            carry = s >> 64;
        }
        if (carry) limbs_.push_back(static_cast<std::uint64_t>(carry));
        return *this;
    }

    friend BigUint operator+(BigUint a, const BigUint& b) { return a += b; }

    // this -= o; requires this >= o.
    BigUint& operator-=(const BigUint& o) {
        std::uint64_t borrow = 0;
        for (std::size_t i = 0; i < limbs_.size(); ++i) {
            unsigned __int128 rhs = borrow;
            if (i < o.limbs_.size()) rhs += o.limbs_[i];
            if (static_cast<unsigned __int128>(limbs_[i]) >= rhs) {
                limbs_[i] -= static_cast<std::uint64_t>(rhs);
                borrow = 0;
            } else {
                limbs_[i] = static_cast<std::uint64_t>(
                    (static_cast<unsigned __int128>(1) << 64) + limbs_[i] - rhs);
                borrow = 1;
            }
        }
        trim();
        return *this;
    }

    BigUint& mul_small(std::uint64_t m) {
        if (m == 0) {
            limbs_.clear();
            return *this;
        }
        unsigned __int128 carry = 0;
        for (auto& l : limbs_) {
            unsigned __int128 p = static_cast<unsigned __int128>(l) * m + carry;
            l = static_cast<std::uint64_t>(p);
            carry = p >> 64;
        }
        if (carry) limbs_.push_back(static_cast<std::uint64_t>(carry));
        return *this;
    }

    // Divide by a small divisor, returning the remainder.
    std::uint64_t div_small(std::uint64_t d) {
        unsigned __int128 rem = 0;
        for (std::size_t i = limbs_.size(); i-- > 0;) {
            unsigned __int128 cur = (rem << 64) | limbs_[i];
            limbs_[i] = static_cast<std::uint64_t>(cur / d);
            rem = cur % d;
        }
        trim();
        return static_cast<std::uint64_t>(rem);
    }

    int compare(const BigUint& o) const {
        if (limbs_.size() != o.limbs_.size())
            return limbs_.size() < o.limbs_.size() ? -1 : 1;
        for (std::size_t i = limbs_.size(); i-- > 0;) {
            if (limbs_[i] != o.limbs_[i]) return limbs_[i] < o.limbs_[i] ? -1 : 1;
        }
        return 0;
    }

    bool operator<(const BigUint& o) const { return compare(o) < 0; }
    bool operator==(const BigUint& o) const { return compare(o) == 0; }
    bool operator!=(const BigUint& o) const { return compare(o) != 0; }
    bool operator<=(const BigUint& o) const { return compare(o) <= 0; }

    double to_double() const {
        double r = 0;
        for (std::size_t i = limbs_.size(); i-- > 0;)
            r = r * 18446744073709551616.0 + static_cast<double>(limbs_[i]);
        return r;
    }

    // Fits in uint64?
    bool fits_u64() const { return limbs_.size() <= 1; }
    std::uint64_t as_u64() const { return limbs_.empty() ? 0 : limbs_[0]; }

    std::string to_string() const {
        if (is_zero()) return "0";
        BigUint t = *this;
        std::string s;
        while (!t.is_zero()) {
            std::uint64_t r = t.div_small(10);
            s.push_back(static_cast<char>('0' + r));
        }
        return std::string(s.rbegin(), s.rend());
    }

    // Uniform integer in [0, bound), bound > 0.  Rejection on the limb
    // prefix keeps the draw exact.
    static BigUint uniform_below(const BigUint& bound, RngStream& rng) {
        if (bound.fits_u64()) return BigUint(rng.uniform_below(bound.as_u64()));
        const std::size_t n = bound.limbs_.size();
        for (;;) {
            BigUint r;
            r.limbs_.resize(n);
            for (std::size_t i = 0; i < n; ++i) r.limbs_[i] = rng.next_u64();
            // Mask the top limb to the bit-length of the bound's top limb.
            std::uint64_t top = bound.limbs_.back();
            std::uint64_t mask = ~0ull >> __builtin_clzll(top);
            r.limbs_.back() &= mask;
            r.trim();
            if (r < bound) return r;
        }
    }

private:
    void trim() {
        while (!limbs_.empty() && limbs_.back() == 0) limbs_.pop_back();
    }

    std::vector<std::uint64_t> limbs_;
};

}  // namespace arctic

#endif
