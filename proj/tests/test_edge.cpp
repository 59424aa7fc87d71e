#include <doctest.h>

#include "arctic/edge.hpp"
#include "arctic/stats.hpp"
#include "oracles.hpp"

using namespace arctic;

TEST_CASE("airy function values and differential equation") {
    // Series anchors 3^{-2/3}/Gamma(2/3) and -3^{-1/3}/Gamma(1/3).
    CHECK(std::fabs(airy_ai(0) - 0.3550280538878172) < 1e-15);
    CHECK(std::fabs(airy_ai_prime(0) + 0.2588194037928068) < 1e-15);
    CHECK(std::fabs(airy_ai(1) - 0.1352924163128814) < 1e-12);
    CHECK(std::fabs(airy_ai(-5) - 0.3507610090241142) < 1e-12);
    CHECK(std::fabs(airy_ai(10) - 1.1047532552898687e-10) < 1e-20);

    // First zero near -2.338107.
    double lo = -2.4, hi = -2.2;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (airy_ai(mid) * airy_ai(lo) <= 0)
            hi = mid;
        else
            lo = mid;
    }
    CHECK(0.5 * (lo + hi) == doctest::Approx(-2.33810741045977).epsilon(1e-9));

    // Ai'' = x Ai on [-8, 4] by a fourth-order stencil, avoiding the
    // series/asymptotics switch points.
    const double h = 0.005;
    for (double x = -8.0; x <= 4.0; x += 0.37) {
        if (std::fabs(std::fabs(x) - 7.0) < 0.06) continue;
        double dd = (-airy_ai(x + 2 * h) + 16 * airy_ai(x + h) - 30 * airy_ai(x) +
                     16 * airy_ai(x - h) - airy_ai(x - 2 * h)) /
                    (12 * h * h);
        CHECK(std::fabs(dd - x * airy_ai(x)) < 1e-8);
    }
    CHECK_THROWS_AS(airy_ai(201.0), range_error);
}

TEST_CASE("extended airy kernel") {
    // Equal times: symmetric, with the known diagonal value at zero.
    CHECK(extended_airy_kernel(0, 0, 0, 0) == doctest::Approx(0.0669875).epsilon(2e-6));
    double k1 = extended_airy_kernel(0.3, 0.4, 0.3, -0.8);
    double k2 = extended_airy_kernel(0.3, -0.8, 0.3, 0.4);
    CHECK(k1 == doctest::Approx(k2).epsilon(1e-9));
    // Equal-time kernel equals the closed form through Airy functions.
    CHECK(extended_airy_kernel(0, 0.4, 0, -0.8) ==
          doctest::Approx(airy_kernel(0.4, -0.8)).epsilon(1e-7));
    // Decay in the far tail.
    CHECK(std::fabs(extended_airy_kernel(0, 25, 0, 25)) < 1e-30);
    CHECK_THROWS_AS(extended_airy_kernel(0, 0, 1e-5, 0), range_error);
}

TEST_CASE("frozen distribution table") {
    // Valid CDF on its range.
    double prev = 0;
    for (double x = -10; x <= 6.0; x += 0.03) {
        double v = tw_gue_cdf(x);
        CHECK(v >= prev - 1e-15);
        CHECK(v >= 0);
        CHECK(v <= 1);
        prev = v;
    }
    CHECK(tw_gue_cdf(-10) < 1e-30);
    CHECK(tw_gue_cdf(6) > 1 - 1e-9);
    CHECK_THROWS_AS(tw_gue_cdf(-11), range_error);
    CHECK_THROWS_AS(tw_gue_cdf(7), range_error);

    double mean, var;
    tw_gue_moments(mean, var);
    CHECK(mean == doctest::Approx(-1.771087).epsilon(0).scale(1).epsilon(5e-3 / 1.771));
    CHECK(std::fabs(mean + 1.7711) < 5e-3);
    CHECK(std::fabs(var - 0.8132) < 5e-3);

    // Regression anchor: the CDF at the mean.
    CHECK(tw_gue_cdf(-1.771087) == doctest::Approx(0.5150).epsilon(2e-3));

    // The table matches its generating quadrature.
    for (double x : {-3.0, -1.5, 0.5}) {
        CHECK(tw_gue_cdf(x) == doctest::Approx(tw_gue_cdf_nystrom(x, 64)).epsilon(1e-6));
    }
}

TEST_CASE("scaling constants") {
    CurvatureParams cp{0.5, -std::sqrt(3.0) / 4};
    ScalingConstants sc = scaling_constants(cp);
    CHECK(sc.s == doctest::Approx(std::pow(2.0, -4.0 / 3.0) * std::pow(3.0, -1.0 / 6.0))
                      .epsilon(1e-12));
    CHECK(sc.r == doctest::Approx(std::pow(2.0 / 3.0, 1.0 / 3.0)).epsilon(1e-12));
    CHECK(sc.s == doctest::Approx(0.33047).epsilon(1e-3));
    CHECK(sc.r == doctest::Approx(0.87358).epsilon(1e-4));

    // Homogeneity in q and the l <-> 1-l symmetry.
    CurvatureParams cp2{0.5, 2 * cp.q};
    ScalingConstants sc2 = scaling_constants(cp2);
    CHECK(sc2.s == doctest::Approx(sc.s * std::pow(2.0, -1.0 / 3.0)).epsilon(1e-12));
    CHECK(sc2.r == doctest::Approx(sc.r * std::pow(2.0, -2.0 / 3.0)).epsilon(1e-12));
    CurvatureParams cp3{0.3, cp.q};
    CurvatureParams cp4{0.7, cp.q};
    CHECK(scaling_constants(cp3).s == doctest::Approx(scaling_constants(cp4).s).epsilon(1e-12));
    CHECK_THROWS_AS(scaling_constants(CurvatureParams{0.0, 1.0}), domain_error);
    CHECK_THROWS_AS(scaling_constants(CurvatureParams{0.5, 0.0}), domain_error);
}

TEST_CASE("rescaled rows round half to even") {
    // t0 n integral, r n^{2/3} t = 0.5 exactly: ties go to the even row.
    CHECK(rescaled_row(1.0, 0.5, 8, 0.25) == 8);  // 8 + 0.25 -> 8
    CHECK(rescaled_row(1.0, 1.0, 8, 0.125) == 8);  // 8 + 0.5 -> even 8
    CHECK(rescaled_row(1.0, 1.0, 8, 0.375) == 10);  // 9.5 -> even 10
    CHECK(rescaled_row(1.0, 1.0, 8, 0.3) == 9);
}

TEST_CASE("deterministic deviation metric") {
    auto spec = hexagon_spec(Rational(1), Rational(1), Rational(1));
    ContinuumHeight hc = solve_limit_shape(spec, 1.0 / 16.0);
    const long long n = 24;
    auto lattice = build_domain(spec, n);
    std::vector<int> rounded(lattice->box_size(), 0);
    for (const Vertex& v : lattice->vertices())
        rounded[lattice->index(v.x, v.y)] = static_cast<int>(
            std::floor(n * hc.value(v.x / double(n), v.y / double(n))));
    CHECK(sup_deviation(rounded, *lattice, hc) <= 1.0);
}

TEST_CASE("edge statistics on a small hexagon are reproducible") {
    HexagonSpec hex{Rational(1), Rational(1), Rational(1)};
    Conic conic = hexagon_inscribed_ellipse(1, 1, 1);
    auto xs = conic.solve_x(1.0);
    EdgeStatsConfig cfg;
    cfg.n = 12;
    cfg.samples = 40;
    cfg.x0 = xs[1];
    cfg.t0 = 1.0;
    cfg.cp = conic_curvature(conic, xs[1], 1.0);
    cfg.seed = 7;
    cfg.threads = 2;
    EdgeStatsReport a = edge_statistics_experiment(hex, cfg);
    EdgeStatsReport b = edge_statistics_experiment(hex, cfg);
    CHECK(a.mean == b.mean);
    CHECK(a.ks_to_tw == b.ks_to_tw);
    CHECK(a.samples == 40);
    // Walk ordering: the second walk sits strictly left.
    for (std::size_t i = 0; i < a.x1_t0.size(); ++i) CHECK(a.x2_t0[i] < a.x1_t0[i]);

    cfg.samples = 0;
    CHECK_THROWS_AS(edge_statistics_experiment(hex, cfg), invalid_argument_error);
}

TEST_CASE("barrier ensemble at a degenerate scale reduces to free walks") {
    BarrierConfig cfg;
    cfg.n = 16;
    cfg.delta = 0.04;   // one walk, short horizon
    cfg.samples = 10;
    cfg.seed = 3;
    BarrierReport rep = quadratic_barrier_experiment(cfg);
    CHECK(rep.walks == 3);
    CHECK(rep.x1_t0.size() == 10);
    for (double v : rep.x1_t0) CHECK(std::isfinite(v));

    // Entrance data violating the closeness tolerance is rejected.
    BarrierConfig bad = cfg;
    bad.entrance = {100000, 100001, 100002};
    CHECK_THROWS_AS(quadratic_barrier_experiment(bad), infeasible_error);
}
