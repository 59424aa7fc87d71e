#include <doctest.h>

#include "arctic/enumeration.hpp"
#include "arctic/lattice.hpp"
#include "arctic/tiling.hpp"
#include "oracles.hpp"

using namespace arctic;

namespace {
DomainPtr hex_domain(long long a, long long b, long long c, long long n = 1) {
    return build_domain(hexagon_spec(Rational(a), Rational(b), Rational(c)), n);
}
}  // namespace

TEST_CASE("height to tiling on the unit hexagon") {
    auto d = hex_domain(1, 1, 1);
    auto bh = boundary_height(d);
    auto states = oracles::enumerate_heights(d, bh);
    REQUIRE(states.size() == 2);
    // Order them by the center value.
    if (states[0].at(1, 1) > states[1].at(1, 1)) std::swap(states[0], states[1]);
    Tiling t0 = height_to_tiling(states[0]);  // H(1,1) = 0
    Tiling t1 = height_to_tiling(states[1]);  // H(1,1) = 1
    REQUIRE(t0.lozenges().size() == 3);
    REQUIRE(t1.lozenges().size() == 3);
    // The two tilings differ in every lozenge.
    for (const Lozenge& a : t0.lozenges())
        for (const Lozenge& b : t1.lozenges())
            CHECK_FALSE((a.x == b.x && a.y == b.y && a.type == b.type));

    // Round trip through the tiling.
    for (const auto& h : states) {
        HeightFunction back = tiling_to_height(height_to_tiling(h), {0, 0}, 0);
        CHECK(back.same_values(h));
    }
    // Anchor shifts shift values globally.
    HeightFunction shifted = tiling_to_height(t1, {0, 0}, 1);
    for (const Vertex& v : d->vertices())
        CHECK(shifted.at(v.x, v.y) == states[1].at(v.x, v.y) + 1);

    // An invalid height function is rejected with the offending edge.
    HeightFunction bad = states[0];
    bad.at(1, 1) += 2;
    CHECK_THROWS_AS(height_to_tiling(bad), validation_error);
    CHECK(validate_height(bad).size() >= 1);
}

TEST_CASE("boundary values fix the corner labels of any tiling") {
    auto d = hex_domain(5, 4, 3);
    auto bh = boundary_height(d);
    RngStream rng(11, 1);
    HeightFunction h = exact_sample(d, bh, rng);
    HeightFunction relabeled = tiling_to_height(height_to_tiling(h), {0, 0}, 0);
    CHECK(relabeled.at(8, 7) == 5);
    CHECK(relabeled.same_values(h));
}

TEST_CASE("walks correspond to unit height increments") {
    auto d = hex_domain(2, 2, 2);
    auto bh = boundary_height(d);
    auto states = oracles::enumerate_heights(d, bh);
    REQUIRE(states.size() == 20);
    for (const auto& h : states) {
        WalkEnsemble w = height_to_walks(h);
        // Index normalization: the walk through [x, x+1] has index H(x+1).
        for (const auto& slice : w.slices()) {
            int idx = slice.first_index;
            for (std::size_t k = 0; k < slice.positions.size(); ++k) {
                int x = slice.positions[k];
                CHECK(h.at(x + 1, slice.t) == idx + static_cast<int>(k));
                if (k > 0) CHECK(slice.positions[k] > slice.positions[k - 1]);
            }
        }
        // Walk count across a row equals the height difference across it.
        for (const auto& slice : w.slices()) {
            int t = slice.t;
            int xl = d->x0(), xr = d->x1();
            while (!d->contains(xl, t)) ++xl;
            while (!d->contains(xr, t)) --xr;
            CHECK(static_cast<int>(slice.positions.size()) == h.at(xr, t) - h.at(xl, t));
        }
        // Round trip.
        HeightFunction back = walks_to_height(w, d, bh);
        CHECK(back.same_values(h));
    }
}

TEST_CASE("hexagon walk ensembles have a walks on every row") {
    auto d = hex_domain(3, 2, 2);
    auto bh = boundary_height(d);
    RngStream rng(5, 1);
    for (int rep = 0; rep < 10; ++rep) {
        HeightFunction h = exact_sample(d, bh, rng);
        WalkEnsemble w = height_to_walks(h);
        // A walk must cross every row of the hexagon: a walks enter at the
        // bottom edge and exit at the top.
        for (const auto& slice : w.slices()) CHECK(slice.positions.size() == 3);
        // Bernoulli steps hold for persistent indices (validated inside).
        CHECK_NOTHROW(walks_to_height(w, d, bh));
    }
}

TEST_CASE("frozen strip has no vertical-lozenge walks outside its band") {
    // Sheared strip: every tiling is all right-jumps; the walk picture is
    // a single diagonal bundle.
    PolygonSpec strip;
    strip.vertices = {{Rational(0), Rational(0)},
                      {Rational(2), Rational(0)},
                      {Rational(4), Rational(2)},
                      {Rational(2), Rational(2)}};
    strip.validate();
    auto d = build_domain(strip, 1);
    auto bh = boundary_height(d);
    auto states = oracles::enumerate_heights(d, bh);
    REQUIRE(states.size() == 1);
    WalkEnsemble w = height_to_walks(states[0]);
    for (const auto& slice : w.slices()) {
        CHECK(slice.positions.size() == 2);
        // All jumps: positions advance by one per row.
        if (slice.t > 0) {
            const auto& prev = w.slice_at(slice.t - 1);
            for (std::size_t k = 0; k < slice.positions.size(); ++k)
                CHECK(slice.positions[k] == prev.positions[k] + 1);
        }
    }
}

TEST_CASE("three-way bijection on sampled larger hexagons") {
    auto d = hex_domain(3, 3, 3);
    auto bh = boundary_height(d);
    RngStream rng(2024, 1);
    ExactSampler sampler(d, bh);
    for (int rep = 0; rep < 1000; ++rep) {
        HeightFunction h = sampler.sample(rng);
        HeightFunction via_tiling = tiling_to_height(height_to_tiling(h), {0, 0}, 0);
        CHECK(via_tiling.same_values(h));
        HeightFunction via_walks = walks_to_height(height_to_walks(h), d, bh);
        CHECK(via_walks.same_values(h));
    }
}
