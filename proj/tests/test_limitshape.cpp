#include <doctest.h>

#include <map>
#include <memory>

#include "arctic/enumeration.hpp"
#include "arctic/limitshape.hpp"
#include "arctic/dynamics.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace arctic;

namespace {
constexpr double kPi = 3.14159265358979323846;


}  // namespace

TEST_CASE("lobachevsky function against the series oracle") {
    CHECK(lobachevsky(0) == doctest::Approx(0.0));
    CHECK(std::fabs(lobachevsky(kPi / 2)) < 1e-10);
    CHECK(lobachevsky(kPi / 6) == doctest::Approx(0.5074708).epsilon(1e-6));
    for (double x : {0.1, 0.37, 0.9, 1.3, 2.0, 2.9, 3.5, 7.0}) {
        CHECK(std::fabs(lobachevsky(x) - oracles::lobachevsky_series(x)) < 1e-9);
    }
    CHECK_THROWS_AS(lobachevsky(-1.0), invalid_argument_error);
}

TEST_CASE("surface tension values, domain and concavity") {
    CHECK(surface_tension({0, 0}) == doctest::Approx(0.0));
    CHECK(surface_tension({1, 0}) == doctest::Approx(0.0));
    CHECK(surface_tension({0, -1}) == doctest::Approx(0.0));
    double expect = 3.0 * oracles::lobachevsky_series(kPi / 3) / kPi;
    CHECK(surface_tension({1.0 / 3.0, -1.0 / 3.0}) == doctest::Approx(expect).epsilon(1e-8));
    CHECK(surface_tension({1.0 / 3.0, -1.0 / 3.0}) == doctest::Approx(0.3230659).epsilon(1e-6));
    CHECK_THROWS_AS(surface_tension({1, -1}), domain_error);

    for (int i = 0; i <= 50; ++i) {
        for (int j = 0; j <= 50; ++j) {
            double s = i / 50.0;
            double t = -j / 50.0;
            if (s - t > 1) continue;
            double v = surface_tension({s, t});
            CHECK(v >= -1e-12);
            bool corner = (s < 1e-9 && -t < 1e-9) || (s > 1 - 1e-9 && -t < 1e-9) ||
                          (s < 1e-9 && -t > 1 - 1e-9);
            if (!corner && slope_margin({s, t}) > 1e-3) CHECK(v > 1e-8);
            if (slope_margin({s, t}) > 0.05) {
                const double h = 1e-4;
                double dss = (surface_tension({s + h, t}) - 2 * v + surface_tension({s - h, t})) /
                             (h * h);
                double dtt = (surface_tension({s, t + h}) - 2 * v + surface_tension({s, t - h})) /
                             (h * h);
                double dst = (surface_tension({s + h, t + h}) - surface_tension({s + h, t - h}) -
                              surface_tension({s - h, t + h}) + surface_tension({s - h, t - h})) /
                             (4 * h * h);
                CHECK(dss <= 1e-8);
                CHECK(dtt <= 1e-8);
                CHECK(dss * dtt - dst * dst >= -1e-6);
            }
        }
    }

    for (auto [s, t] : {std::pair{0.3, -0.25}, {0.5, -0.2}, {0.2, -0.6}}) {
        double ds, dt;
        surface_tension_grad({s, t}, ds, dt);
        const double h = 1e-6;
        CHECK(ds == doctest::Approx((surface_tension({s + h, t}) - surface_tension({s - h, t})) /
                                    (2 * h)).epsilon(1e-4));
        CHECK(dt == doctest::Approx((surface_tension({s, t + h}) - surface_tension({s, t - h})) /
                                    (2 * h)).epsilon(1e-4));
    }
}

TEST_CASE("entropy functional on uniform-slope fields") {
    PolygonSpec sq;
    sq.vertices = {{Rational(0), Rational(0)},
                   {Rational(1), Rational(0)},
                   {Rational(1), Rational(1)},
                   {Rational(0), Rational(1)}};
    sq.validate();
    for (long long nm : {8, 16}) {
        auto grid = build_domain(sq, nm);
        std::vector<double> zeros(grid->box_size(), 0.0);
        ContinuumHeight flat(grid, 1.0 / nm, zeros);
        CHECK(entropy_functional(flat) == doctest::Approx(0.0));

        // Raw gradient (2/3, -1/3) has slope parameters (1/3, -1/3).
        std::vector<double> lin(grid->box_size(), 0.0);
        for (const Vertex& v : grid->vertices())
            lin[grid->index(v.x, v.y)] = (2.0 * v.x - v.y) / (3.0 * nm);
        ContinuumHeight tilted(grid, 1.0 / nm, lin);
        CHECK(entropy_functional(tilted) ==
              doctest::Approx(surface_tension({1.0 / 3.0, -1.0 / 3.0})).epsilon(1e-9));
    }
}

TEST_CASE("inscribed ellipse of a hexagon") {
    Conic c = hexagon_inscribed_ellipse(1, 1, 1);
    CHECK(c.a == doctest::Approx(1.0));
    CHECK(c.b == doctest::Approx(-1.0));
    CHECK(c.c == doctest::Approx(1.0));
    CHECK(c.d == doctest::Approx(-1.0));
    CHECK(c.e == doctest::Approx(-1.0));
    CHECK(c.f == doctest::Approx(0.25));
    auto xs = c.solve_x(0.0);
    REQUIRE(xs.size() == 2);
    CHECK(xs[0] == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(xs[1] == doctest::Approx(0.5).epsilon(1e-5));
    Conic c2 = hexagon_inscribed_ellipse(2, 2, 2);
    auto xs2 = c2.solve_x(2.0);
    auto xs1 = c.solve_x(1.0);
    REQUIRE(xs2.size() == 2);
    CHECK(xs2[1] == doctest::Approx(2 * xs1[1]).epsilon(1e-9));

    Conic g = hexagon_inscribed_ellipse(2, 1, 3);
    auto bottom = g.solve_x(0.0);
    REQUIRE(bottom.size() == 2);
    CHECK(bottom[1] - bottom[0] < 1e-4);
}

TEST_CASE("curvature parameters of the unit-hexagon ellipse") {
    Conic c = hexagon_inscribed_ellipse(1, 1, 1);
    double r3 = std::sqrt(3.0);
    CurvatureParams right = conic_curvature(c, 1 + r3 / 2, 1.0);
    CHECK(right.l == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(right.q == doctest::Approx(-r3 / 4).epsilon(1e-9));
    CurvatureParams left = conic_curvature(c, 1 - r3 / 2, 1.0);
    CHECK(left.l == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(left.q == doctest::Approx(+r3 / 4).epsilon(1e-9));
    double ytop = 1 + 1.0 / r3;
    auto xs = c.solve_x(ytop - 1e-12);
    REQUIRE(xs.size() == 2);
    CHECK_THROWS_AS(conic_curvature(c, 0.5 * (xs[0] + xs[1]), ytop), tangency_error);

    std::vector<std::array<double, 2>> poly;
    for (int k = 0; k <= 2000; ++k) {
        double y = 1.0 + (k - 1000) / 1000.0 * 0.4;
        auto s = c.solve_x(y);
        if (s.size() == 2) poly.push_back({s[1], y});
    }
    CurvatureParams fit = polyline_curvature(poly, 1 + r3 / 2, 1.0, 0.15);
    CHECK(fit.l == doctest::Approx(right.l).epsilon(0.02));
    CHECK(fit.q == doctest::Approx(right.q).epsilon(0.02));
}

TEST_CASE("variational solver on the unit hexagon") {
    const ContinuumHeight& hc = fixtures::solved_unit_hexagon(1.0 / 16.0);
    CHECK(hc.value(1.0, 1.0) == doctest::Approx(0.5).epsilon(0.01));
    auto bh = boundary_height(hc.grid());
    for (const Vertex& v : hc.grid()->boundary_vertices())
        CHECK(hc.at_node(v.x, v.y) == doctest::Approx(bh.at(v.x, v.y) / 16.0).epsilon(1e-12));
    const LatticeDomain& d = *hc.grid();
    for (int j = d.y0(); j < d.y1(); ++j)
        for (int i = d.x0(); i < d.x1(); ++i)
            if (hc.cell_in_domain(i, j)) CHECK(hc.cell_margin(i, j) > -1e-9);

    auto spec = hexagon_spec(Rational(1), Rational(1), Rational(1));
    SolveOptions coarse_opts;
    coarse_opts.max_sweeps = 4;
    coarse_opts.over_relax = 1.0;
    ContinuumHeight rough = solve_limit_shape(spec, 1.0 / 16.0, coarse_opts);
    CHECK(entropy_functional(hc) >= entropy_functional(rough) - 1e-12);

    PolygonSpec strip;
    strip.vertices = {{Rational(0), Rational(0)},
                      {Rational(1), Rational(0)},
                      {Rational(3), Rational(2)},
                      {Rational(2), Rational(2)}};
    strip.validate();
    ContinuumHeight fz = solve_limit_shape(strip, 1.0 / 8.0);
    auto fz_bh = boundary_height(fz.grid());
    auto [fzlo, fzhi] = extremal_heights(fz.grid(), fz_bh);
    for (const Vertex& v : fz.grid()->vertices()) {
        CHECK(fzlo.at(v.x, v.y) == fzhi.at(v.x, v.y));
        CHECK(fz.at_node(v.x, v.y) == doctest::Approx(fzlo.at(v.x, v.y) / 8.0).epsilon(1e-9));
    }
}

TEST_CASE("liquid region against the inscribed ellipse") {
    const ContinuumHeight& hc = fixtures::solved_unit_hexagon(1.0 / 32.0);
    const LiquidRegion& liq = fixtures::unit_hexagon_liquid(hc.mesh());
    REQUIRE(liq.arctic_polyline.size() > 50);
    Conic conic = hexagon_inscribed_ellipse(1, 1, 1);
    double worst = 0;
    for (const auto& p : liq.arctic_polyline) {
        double g = std::hypot(2 * conic.a * p[0] + conic.b * p[1] + conic.d,
                              conic.b * p[0] + 2 * conic.c * p[1] + conic.e);
        worst = std::max(worst, std::fabs(conic.eval(p[0], p[1])) / g);
    }
    for (int k = 0; k < 720; ++k) {
        double th = 2 * kPi * k / 720;
        double u = std::cos(th), v = std::sin(th);
        double scale = std::sqrt(0.75 / (u * u + v * v - u * v));
        worst = std::max(worst,
                         distance_to_polyline(liq.arctic_polyline, 1 + u * scale, 1 + v * scale));
    }
    CHECK(worst < 2.0 / 32.0);

    const LatticeDomain& d = *hc.grid();
    std::vector<int> comp(d.box_size(), -1);
    int ncomp = 0;
    for (int j = d.y0(); j < d.y1(); ++j)
        for (int i = d.x0(); i < d.x1(); ++i) {
            if (!liq.cell_mask[d.index(i, j)] || comp[d.index(i, j)] >= 0) continue;
            std::vector<std::pair<int, int>> stack{{i, j}};
            comp[d.index(i, j)] = ncomp;
            while (!stack.empty()) {
                auto [x, y] = stack.back();
                stack.pop_back();
                for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
                    int nx = x + dx, ny = y + dy;
                    if (nx < d.x0() || nx >= d.x1() || ny < d.y0() || ny >= d.y1()) continue;
                    if (!liq.cell_mask[d.index(nx, ny)] || comp[d.index(nx, ny)] >= 0) continue;
                    comp[d.index(nx, ny)] = ncomp;
                    stack.emplace_back(nx, ny);
                }
            }
            ++ncomp;
        }
    CHECK(ncomp == 1);

    auto aug = augmented_region(hc, liq, 0.3, 64);
    auto red = reduced_region(hc, liq, 0.3, 64);
    std::size_t aug_n = 0, red_n = 0, mask_n = 0;
    for (std::size_t i = 0; i < liq.cell_mask.size(); ++i) {
        if (red[i]) CHECK(liq.cell_mask[i]);
        if (liq.cell_mask[i]) CHECK(aug[i]);
        aug_n += aug[i];
        red_n += red[i];
        mask_n += liq.cell_mask[i];
    }
    CHECK(red_n < mask_n);
    CHECK(mask_n < aug_n);
    double r = std::pow(64.0, 0.3 - 2.0 / 3.0);
    double perimeter = 2 * kPi * 0.75;  // rough circumference of the ellipse
    double collar = static_cast<double>(aug_n - red_n) / (32.0 * 32.0);
    CHECK(collar > 0.4 * perimeter * 2 * r);
    CHECK(collar < 3.0 * perimeter * 2 * r);
}

TEST_CASE("classical locations on the solved hexagon") {
    const ContinuumHeight& hc = fixtures::solved_unit_hexagon(1.0 / 32.0);
    const LiquidRegion& liq = fixtures::unit_hexagon_liquid(hc.mesh());
    const long long n = 1000;
    double right = classical_location(hc, liq, n, 1.0, n);
    double left = classical_location(hc, liq, 0, 1.0, n);
    CHECK(std::fabs(right - (1 + std::sqrt(3.0) / 2)) < 2.0 / 32.0);
    CHECK(std::fabs(left - (1 - std::sqrt(3.0) / 2)) < 2.0 / 32.0);
    double prev = left;
    for (long long i = 100; i <= 900; i += 100) {
        double g = classical_location(hc, liq, i, 1.0, n);
        CHECK(g >= prev - 1e-9);
        prev = g;
    }
    CHECK_THROWS_AS(classical_location(hc, liq, 5 * n, 1.0, n), not_found_error);
}

TEST_CASE("level expansion near the edge") {
    const ContinuumHeight& hc = fixtures::solved_unit_hexagon(1.0 / 64.0);
    const LiquidRegion& liq = fixtures::unit_hexagon_liquid(hc.mesh());
    Conic conic = hexagon_inscribed_ellipse(1, 1, 1);
    double x0 = 1 + std::sqrt(3.0) / 2, t0 = 1.0;
    CurvatureParams cp = conic_curvature(conic, x0, t0);
    const long long n = 10000;
    const double mesh = 1.0 / 64.0;

    CHECK(gamma_expansion_residual(hc, liq, x0, t0, cp, 0, t0, n) < 3 * mesh);
    for (long long j : {1LL, 8LL, 64LL}) {
        double res = gamma_expansion_residual(hc, liq, x0, t0, cp, j, t0, n);
        CHECK(res <= 5.0 * (static_cast<double>(j) / n + mesh * mesh));
    }

    // The level term scales by 2^(2/3) under doubling.
    auto jterm = [&](long long j) {
        double s_const = std::pow(std::fabs(cp.l) * std::fabs(1 - cp.l), 2.0 / 3.0) /
                         (std::pow(4.0, 1.0 / 3.0) * std::pow(std::fabs(cp.q), 1.0 / 3.0));
        return std::pow(s_const, 1.5) * std::pow(3 * kPi * j / (2.0 * n), 2.0 / 3.0);
    };
    CHECK(jterm(16) / jterm(8) == doctest::Approx(std::pow(2.0, 2.0 / 3.0)).epsilon(0.02));
}

TEST_CASE("tilt measurement") {
    const ContinuumHeight& hc = fixtures::solved_unit_hexagon(1.0 / 32.0);
    const LiquidRegion& liq = fixtures::unit_hexagon_liquid(hc.mesh());
    const long long n = 32;
    auto spec = hexagon_spec(Rational(1), Rational(1), Rational(1));
    auto lattice = build_domain(spec, n);
    auto lbh = boundary_height(lattice);

    std::vector<int> rounded(lattice->box_size(), 0);
    for (const Vertex& v : lattice->vertices())
        rounded[lattice->index(v.x, v.y)] = static_cast<int>(
            std::floor(n * hc.value(v.x / double(n), v.y / double(n)) + 1e-9));
    HeightFunction near_star(lattice, rounded);

    auto omega = [](double) { return -0.2; };
    std::vector<TiltEdgePoint> edges;
    edges.push_back({1 + std::sqrt(3.0) / 2, 0.25, 0, +1});
    edges.push_back({1 - std::sqrt(3.0) / 2, 0.25, 0, -1});
    TiltReport rep = measure_tilt(near_star, hc, liq, 1.0, omega, edges, 0.1);
    CHECK(rep.mu <= 1.0 / n + 1e-6);
    CHECK(rep.bulk_points > 0);

    RngStream rng(9, 1);
    CftpResult res = perfect_sample_cftp(lattice, lbh, rng);
    TiltReport rep2 = measure_tilt(res.sample, hc, liq, 1.0, omega, edges, 0.1);
    CHECK(rep2.zeta < 1.0);
    CHECK(rep2.mu < 0.5);
}
