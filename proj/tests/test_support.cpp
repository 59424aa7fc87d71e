#include <doctest.h>

#include <set>

#include "arctic/bigint.hpp"
#include "arctic/rng.hpp"
#include "arctic/stats.hpp"

using namespace arctic;

TEST_CASE("counter rng is reproducible and splittable") {
    RngStream a(12345, 7), b(12345, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
    CHECK(a.at(5) == b.at(5));
    RngStream c = a.split(1), d = a.split(2);
    CHECK(c.next_u64() != d.next_u64());

    // Uniform draws hit every residue without bias worth noticing.
    RngStream r(1, 1);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 100000; ++i) ++counts[r.uniform_below(10)];
    for (int c10 : counts) CHECK(std::abs(c10 - 10000) < 500);
}

TEST_CASE("big integers add, multiply and print") {
    BigUint x(0);
    CHECK(x.is_zero());
    CHECK(x.to_string() == "0");
    BigUint a(123456789);
    a.mul_small(1000000007ull);
    a += BigUint(11);
    CHECK(a.to_string() == "123456789864197534");  // 123456789 * 1000000007 + 11
    // 2^130
    BigUint p(1);
    for (int i = 0; i < 130; ++i) p.mul_small(2);
    CHECK(p.to_string() == "1361129467683753853853498429727072845824");
    BigUint q = p;
    q -= BigUint(1);
    CHECK(q < p);
    CHECK(q.to_string() == "1361129467683753853853498429727072845823");

    RngStream rng(3, 3);
    BigUint bound(1000);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 5000; ++i) {
        BigUint v = BigUint::uniform_below(bound, rng);
        CHECK(v < bound);
        seen.insert(v.as_u64());
    }
    CHECK(seen.size() > 900);
}

TEST_CASE("chi-squared survival function") {
    CHECK(chi2_sf(0.0, 3) == doctest::Approx(1.0));
    // Classical 5% quantiles.
    CHECK(chi2_sf(3.841458820694124, 1) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(chi2_sf(18.307038053275146, 10) == doctest::Approx(0.05).epsilon(1e-6));
    CHECK(chi2_sf(1.0, 4) > chi2_sf(2.0, 4));
}

TEST_CASE("pairwise moments and KS helpers") {
    std::vector<double> xs;
    for (int i = 1; i <= 1000; ++i) xs.push_back(static_cast<double>(i));
    CHECK(sample_mean(xs) == doctest::Approx(500.5));
    CHECK(sample_variance(xs) == doctest::Approx(1000.0 * 1001.0 / 12.0).epsilon(1e-12));

    std::vector<double> grid;
    for (int i = 0; i < 100; ++i) grid.push_back((i + 0.5) / 100.0);
    double d = ks_distance(grid, [](double x) { return x; });
    CHECK(d <= 0.0051);
}
