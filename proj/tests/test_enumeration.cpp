#include <doctest.h>

#include <map>
#include <set>

#include "arctic/stats.hpp"

#include "arctic/enumeration.hpp"
#include "arctic/lattice.hpp"
#include "oracles.hpp"

using namespace arctic;

namespace {
DomainPtr hex_domain(long long a, long long b, long long c, long long n = 1) {
    return build_domain(hexagon_spec(Rational(a), Rational(b), Rational(c)), n);
}
}  // namespace

TEST_CASE("exact counts against three independent oracles") {
    CHECK(count_tilings(hex_domain(1, 1, 1), boundary_height(hex_domain(1, 1, 1))).to_string() ==
          "2");
    CHECK(count_tilings(hex_domain(2, 2, 2), boundary_height(hex_domain(2, 2, 2))).to_string() ==
          "20");
    for (long long a = 1; a <= 3; ++a)
        for (long long b = 1; b <= 3; ++b)
            for (long long c = 1; c <= 3; ++c) {
                auto d = hex_domain(a, b, c);
                auto bh = boundary_height(d);
                BigUint dp = count_tilings(d, bh);
                CHECK(dp.to_string() == oracles::hexagon_count_product(a, b, c).to_string());
                CHECK(dp.as_u64() == count_tilings_recursive(d));
                CHECK(dp.as_u64() == oracles::enumerate_heights(d, bh).size());
            }
    // The classic 4x4x4 value.
    CHECK(oracles::hexagon_count_product(4, 4, 4).to_string() == "232848");
    auto d4 = hex_domain(4, 4, 4);
    CHECK(count_tilings(d4, boundary_height(d4)).to_string() == "232848");

    // Frozen strip counts one.
    PolygonSpec strip;
    strip.vertices = {{Rational(0), Rational(0)},
                      {Rational(2), Rational(0)},
                      {Rational(5), Rational(3)},
                      {Rational(3), Rational(3)}};
    strip.validate();
    auto sd = build_domain(strip, 1);
    CHECK(count_tilings(sd, boundary_height(sd)).to_string() == "1");
}

TEST_CASE("enumerate_all lists distinct valid extensions") {
    auto d = hex_domain(2, 2, 2);
    auto bh = boundary_height(d);
    auto all = enumerate_all(d, bh);
    REQUIRE(all.size() == 20);
    std::set<std::vector<int>> keys;
    for (const auto& h : all) {
        CHECK(validate_height(h, bh).empty());
        std::vector<int> key;
        for (const Vertex& v : d->vertices()) key.push_back(h.at(v.x, v.y));
        keys.insert(key);
    }
    CHECK(keys.size() == 20);

    auto u = hex_domain(1, 1, 1);
    auto ubh = boundary_height(u);
    auto two = enumerate_all(u, ubh);
    REQUIRE(two.size() == 2);
    CHECK(two[0].at(1, 1) != two[1].at(1, 1));
}

TEST_CASE("exact sampling is uniform") {
    auto u = hex_domain(1, 1, 1);
    auto ubh = boundary_height(u);
    RngStream rng(77, 1);
    int ups = 0;
    const int n = 100000;
    ExactSampler s1(u, ubh);
    for (int i = 0; i < n; ++i) ups += s1.sample(rng).at(1, 1);
    // Frequency of each of the two states within 3 sigma of 1/2.
    double sigma = std::sqrt(0.25 * n);
    CHECK(std::fabs(ups - n / 2.0) < 3 * sigma);

    auto d = hex_domain(2, 2, 2);
    auto bh = boundary_height(d);
    ExactSampler s2(d, bh);
    auto states = enumerate_all(d, bh);
    auto key_of = [&](const HeightFunction& h) {
        std::vector<int> key;
        for (const Vertex& v : d->vertices()) key.push_back(h.at(v.x, v.y));
        return key;
    };
    std::map<std::vector<int>, int> counts;
    for (const auto& st : states) counts[key_of(st)] = 0;
    const int n2 = 100000;
    for (int i = 0; i < n2; ++i) ++counts[key_of(s2.sample(rng))];
    std::vector<double> obs, expd;
    for (auto& [k, c] : counts) {
        obs.push_back(c);
        expd.push_back(n2 / 20.0);
    }
    double p = chi2_sf(chi2_stat(obs, expd), 19);
    CHECK(p > 0.01);

    // Single-vertex marginal against enumeration.
    int center2 = 0;
    for (const auto& st : states)
        if (st.at(2, 2) == 2) ++center2;
    int hits = 0;
    const int n3 = 50000;
    for (int i = 0; i < n3; ++i) hits += s2.sample(rng).at(2, 2) == 2 ? 1 : 0;
    double p_true = center2 / 20.0;
    double sig = std::sqrt(p_true * (1 - p_true) * n3);
    CHECK(std::fabs(hits - p_true * n3) < 3 * sig);

    // Frozen domain always returns the unique extension.
    PolygonSpec strip;
    strip.vertices = {{Rational(0), Rational(0)},
                      {Rational(1), Rational(0)},
                      {Rational(3), Rational(2)},
                      {Rational(2), Rational(2)}};
    strip.validate();
    auto sd = build_domain(strip, 1);
    auto sbh = boundary_height(sd);
    auto [slo, shi] = extremal_heights(sd, sbh);
    for (int i = 0; i < 5; ++i) CHECK(exact_sample(sd, sbh, rng).same_values(slo));
}

TEST_CASE("stationary_tv measures distance to uniform") {
    auto d = hex_domain(2, 2, 2);
    auto bh = boundary_height(d);
    RngStream rng(123, 9);
    ExactSampler s(d, bh);
    double tv = stationary_tv(d, bh, [&]() { return s.sample(rng); }, 100000);
    CHECK(tv < 0.01);

    // A constant sampler concentrates on one state.
    HeightFunction fixed = s.sample(rng);
    double tv_const = stationary_tv(d, bh, [&]() { return fixed; }, 1000);
    CHECK(tv_const == doctest::Approx(1.0 - 1.0 / 20.0));

    CHECK_THROWS_AS(stationary_tv(d, bh, [&]() { return fixed; }, 0), invalid_argument_error);
}

TEST_CASE("capacity guards") {
    auto d = hex_domain(2, 2, 2);
    auto bh = boundary_height(d);
    DpConfig tiny;
    tiny.width_cap = 2;
    CHECK_THROWS_AS(count_tilings(d, bh, tiny), capacity_error);
    CHECK_THROWS_AS(enumerate_all(d, bh, 5), capacity_error);
}

TEST_CASE("conditional laws inside a strip are uniform") {
    auto d = hex_domain(2, 2, 2);
    auto bh = boundary_height(d);
    RngStream rng(31337, 1);
    GibbsReport rep = conditional_gibbs_check(d, bh, 1, 3, 40000, rng);
    CHECK(rep.tested_groups >= 1);
    CHECK(rep.min_p_value > 0.01);

    // Strip covering everything: a single group, plain uniformity.
    RngStream rng2(31338, 1);
    GibbsReport whole = conditional_gibbs_check(d, bh, d->y0(), d->y1(), 40000, rng2);
    CHECK(whole.groups.size() == 1);
    CHECK(whole.min_p_value > 0.01);

    // Frozen strip: every conditional space is a singleton.
    RngStream rng3(31339, 1);
    GibbsReport frozen = conditional_gibbs_check(d, bh, 0, 1, 2000, rng3);
    for (const auto& g : frozen.groups) {
        CHECK(g.conditional_states == 1);
        CHECK_FALSE(g.tested);
    }
}
