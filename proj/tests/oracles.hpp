// Test-side oracles, kept independent of the library code paths they
// check: direct recursive enumeration of height functions, the boxed
// product formula for hexagon counts, and a series evaluation of the
// Lobachevsky function.
#ifndef ARCTIC_TESTS_ORACLES_HPP
#define ARCTIC_TESTS_ORACLES_HPP

#include <climits>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "arctic/bigint.hpp"
#include "arctic/lattice.hpp"
#include "arctic/tiling.hpp"

namespace oracles {

// All height functions with the given boundary values, by direct
// backtracking over interior vertices in scan order.
inline void enumerate_heights_rec(const arctic::LatticeDomain& d,
                                  const std::vector<arctic::Vertex>& free_order, std::size_t k,
                                  std::vector<int>& values,
                                  std::vector<std::vector<int>>& out, std::uint64_t cap) {
    if (k == free_order.size()) {
        out.push_back(values);
        if (out.size() > cap) throw arctic::capacity_error("oracle enumeration too large");
        return;
    }
    auto [x, y] = free_order[k];
    // Candidate window from already-assigned neighbors; unassigned ones are
    // marked INT_MIN and skipped.
    constexpr int unset = INT_MIN;
    int lo = -1000000, hi = 1000000;
    auto tighten = [&](int nx, int ny, int dlo, int dhi) {
        if (!d.contains(nx, ny)) return;
        int v = values[d.index(nx, ny)];
        if (v == unset) return;
        lo = std::max(lo, v + dlo);
        hi = std::min(hi, v + dhi);
    };
    // H(x,y) - H(x-1,y) in {0,1}  ->  H in [W, W+1]; etc.
    tighten(x - 1, y, 0, 1);
    tighten(x + 1, y, -1, 0);
    tighten(x, y + 1, 0, 1);    // H(S(x,y+1))... downward rule from above
    tighten(x, y - 1, -1, 0);
    tighten(x + 1, y + 1, -1, 0);
    tighten(x - 1, y - 1, 0, 1);
    for (int v = lo; v <= hi; ++v) {
        values[d.index(x, y)] = v;
        enumerate_heights_rec(d, free_order, k + 1, values, out, cap);
    }
    values[d.index(x, y)] = unset;
}

inline std::vector<arctic::HeightFunction> enumerate_heights(
    const arctic::DomainPtr& domain, const arctic::BoundaryHeightFn& bh,
    std::uint64_t cap = 2000000) {
    const arctic::LatticeDomain& d = *domain;
    std::vector<int> values(d.box_size(), INT_MIN);
    for (const arctic::Vertex& v : d.boundary_vertices())
        values[d.index(v.x, v.y)] = bh.at(v.x, v.y);
    std::vector<std::vector<int>> raw;
    std::vector<arctic::Vertex> order = d.interior_vertices();
    enumerate_heights_rec(d, order, 0, values, raw, cap);
    std::vector<arctic::HeightFunction> out;
    for (auto& vals : raw) {
        for (auto& x : vals)
            if (x == INT_MIN) x = 0;
        out.emplace_back(domain, std::move(vals));
    }
    return out;
}

// Boxed product formula: count(a,b,c) = prod_{i<=a} prod_{j<=b}
// (c+i+j-1)/(i+j-1), evaluated exactly with pairwise cancellation.
inline arctic::BigUint hexagon_count_product(long long a, long long b, long long c) {
    std::vector<unsigned long long> nums, dens;
    for (long long i = 1; i <= a; ++i)
        for (long long j = 1; j <= b; ++j) {
            nums.push_back(static_cast<unsigned long long>(c + i + j - 1));
            dens.push_back(static_cast<unsigned long long>(i + j - 1));
        }
    for (auto& den : dens) {
        for (auto& num : nums) {
            if (den == 1) break;
            unsigned long long g = std::gcd(den, num);
            den /= g;
            num /= g;
        }
    }
    arctic::BigUint result(1);
    for (auto num : nums) result.mul_small(num);
    for (auto den : dens)
        if (den != 1) throw arctic::error("product formula cancellation failed");
    return result;
}

// Lobachevsky function by its Fourier series 0.5 * sum sin(2kx)/k^2.
inline double lobachevsky_series(double x, int terms = 400000) {
    double s = 0;
    for (int k = terms; k >= 1; --k) s += std::sin(2.0 * k * x) / (static_cast<double>(k) * k);
    return 0.5 * s;
}

}  // namespace oracles

#endif
