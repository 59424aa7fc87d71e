// Acceptance suite: one line per criterion, nonzero exit on any failure.
//
// The statistical criteria run the documented desk-scale budgets: the
// formula budgets (A^6 and C A^4 log A) are rigorous upper bounds but
// astronomically conservative, so small-domain stationarity is checked
// after short documented runs, and large-domain sampling uses either
// perfect simulation or single-flip budgets calibrated from the measured
// coalescence time of the extremal coupling.

#include <chrono>
#include <string>
#include <cstdio>
#include <map>
#include <vector>

#include "arctic/dynamics.hpp"
#include "arctic/edge.hpp"
#include "arctic/enumeration.hpp"
#include "arctic/limitshape.hpp"
#include "arctic/slope.hpp"
#include "arctic/stats.hpp"
#include "oracles.hpp"

using namespace arctic;

namespace {

constexpr double kPi = 3.14159265358979323846;
int g_failures = 0;

void report(int criterion, bool pass, const std::string& details) {
    std::printf("criterion %2d: %s  %s\n", criterion, pass ? "PASS" : "FAIL", details.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

DomainPtr hex_domain(long long a, long long b, long long c, long long n = 1) {
    return build_domain(hexagon_spec(Rational(a), Rational(b), Rational(c)), n);
}

std::vector<int> state_key(const HeightFunction& h) {
    std::vector<int> key;
    for (const Vertex& v : h.domain()->vertices()) key.push_back(h.at(v.x, v.y));
    return key;
}

double elapsed(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- criterion 1: exact counts against the product formula ----
void criterion_counting() {
    auto t0 = std::chrono::steady_clock::now();
    bool pass = true;
    std::string bad;
    for (long long a = 1; a <= 4 && pass; ++a)
        for (long long b = 1; b <= 4 && pass; ++b)
            for (long long c = 1; c <= 4 && pass; ++c) {
                auto d = hex_domain(a, b, c);
                BigUint dp = count_tilings(d, boundary_height(d));
                BigUint oracle = oracles::hexagon_count_product(a, b, c);
                if (!(dp == oracle)) {
                    pass = false;
                    bad = "mismatch at " + std::to_string(a) + "," + std::to_string(b) + "," +
                          std::to_string(c);
                }
            }
    char buf[160];
    std::snprintf(buf, sizeof buf, "all 64 hexagon counts equal the product oracle (%.1fs) %s",
                  elapsed(t0), bad.c_str());
    report(1, pass, buf);
}

// ---- criterion 2: stationarity of the four dynamics ----
void criterion_stationarity() {
    auto t0 = std::chrono::steady_clock::now();
    auto d = hex_domain(2, 2, 2);
    auto bh = boundary_height(d);
    auto [lo, hi] = extremal_heights(d, bh);
    RegionDecomposition bands = horizontal_bands(d, 2, 1);
    auto p = bands.interior_fractions();
    const std::uint64_t draws = 100000;
    RngStream rng(101, 1);
    HeightFunction start = lo;

    // Documented surrogate budgets, far below the formula bounds but past
    // the observed coalescence scale (~200 flips on this domain).
    double tv_flip = stationary_tv(d, bh, [&] {
        HeightFunction h = start;
        run_flip_dynamics(h, 400, rng);
        return h;
    }, draws);
    double tv_region = stationary_tv(d, bh, [&] {
        HeightFunction h = start;
        run_region_flip(h, bands, 8, 600, rng);
        return h;
    }, draws);
    double tv_censored = stationary_tv(d, bh, [&] {
        HeightFunction h = start;
        auto sched = censor_sequence(p, 600, rng);
        run_censored(h, bands, sched, rng);
        return h;
    }, draws);
    double tv_alternating = stationary_tv(d, bh, [&] {
        HeightFunction h = start;
        run_alternating(h, bands, 12, rng);
        return h;
    }, draws);
    bool pass = tv_flip < 0.02 && tv_region < 0.02 && tv_censored < 0.02 && tv_alternating < 0.02;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "TV to uniform: flip %.4f region %.4f censored %.4f alternating %.4f "
                  "(gate 0.02, %.0fs)",
                  tv_flip, tv_region, tv_censored, tv_alternating, elapsed(t0));
    report(2, pass, buf);
}

// ---- criterion 3: monotone coupling ----
void criterion_coupling() {
    auto t0 = std::chrono::steady_clock::now();
    auto d = hex_domain(2, 2, 2);
    auto bh = boundary_height(d);
    auto [lo, hi] = extremal_heights(d, bh);
    bool pass = true;
    std::string err;
    for (int trial = 0; trial < 10000 && pass; ++trial) {
        std::vector<HeightFunction> copies{hi, lo};
        RngStream rng(3000, static_cast<std::uint64_t>(trial) + 1);
        try {
            grand_coupling_run(copies, 1000, rng);  // asserts order each step
        } catch (const error& e) {
            pass = false;
            err = e.what();
        }
    }
    char buf[200];
    std::snprintf(buf, sizeof buf, "10^4 coupled pairs x 10^3 steps, order asserted exactly%s%s (%.0fs)",
                  err.empty() ? "" : ": ", err.c_str(), elapsed(t0));
    report(3, pass, buf);
}

// ---- criterion 4: conditional uniformity inside a strip ----
void criterion_gibbs() {
    auto t0 = std::chrono::steady_clock::now();
    auto d = hex_domain(2, 2, 2);
    auto bh = boundary_height(d);
    RngStream rng(40001, 1);
    GibbsReport rep = conditional_gibbs_check(d, bh, 1, 3, 60000, rng);
    bool pass = rep.tested_groups >= 1 && rep.min_p_value > 0.01;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%llu groups tested, min p-value %.4f (gate 0.01, %.0fs)",
                  static_cast<unsigned long long>(rep.tested_groups), rep.min_p_value,
                  elapsed(t0));
    report(4, pass, buf);
}

struct SolvedShape {
    ContinuumHeight hc;
    LiquidRegion liq;
};

SolvedShape solve_hexagon(double mesh) {
    auto spec = hexagon_spec(Rational(1), Rational(1), Rational(1));
    ContinuumHeight hc = solve_limit_shape(spec, mesh);
    LiquidRegion liq = extract_liquid_region(hc);
    return {std::move(hc), std::move(liq)};
}

// ---- criterion 5: limit shape against the inscribed ellipse ----
void criterion_limit_shape(const SolvedShape& fine) {
    auto t0 = std::chrono::steady_clock::now();
    Conic conic = hexagon_inscribed_ellipse(1, 1, 1);
    double worst = 0;
    for (const auto& p : fine.liq.arctic_polyline) {
        double g = std::hypot(2 * conic.a * p[0] + conic.b * p[1] + conic.d,
                              conic.b * p[0] + 2 * conic.c * p[1] + conic.e);
        worst = std::max(worst, std::fabs(conic.eval(p[0], p[1])) / std::max(g, 1e-12));
    }
    for (int k = 0; k < 720; ++k) {
        double th = 2 * kPi * k / 720;
        double u = std::cos(th), v = std::sin(th);
        double scale = std::sqrt(0.75 / (u * u + v * v - u * v));
        worst = std::max(worst, distance_to_polyline(fine.liq.arctic_polyline, 1 + u * scale,
                                                     1 + v * scale));
    }
    double center = fine.hc.value(1.0, 1.0);
    bool pass = worst < 2.0 / 64.0 && std::fabs(center - 0.5) < 0.01;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "arctic-ellipse distance %.4f (gate %.4f), center %.4f (gate 0.5 +- 0.01) (%.0fs)",
                  worst, 2.0 / 64.0, center, elapsed(t0));
    report(5, pass, buf);
}

// ---- criterion 6: transport-equation residual halves under refinement ----
void criterion_burgers(const SolvedShape& coarse, const SolvedShape& fine) {
    auto t0 = std::chrono::steady_clock::now();
    ComplexSlopeField f32 = complex_slope_field(coarse.hc, coarse.liq);
    ComplexSlopeField f64 = complex_slope_field(fine.hc, fine.liq);
    auto b32 = burgers_residual(f32);
    auto b64 = burgers_residual(f64);
    double ratio = b32.median / b64.median;
    bool pass = ratio >= 1.5;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "median residual %.5f (1/32) -> %.5f (1/64), ratio %.2f (gate 1.5) (%.0fs)",
                  b32.median, b64.median, ratio, elapsed(t0));
    report(6, pass, buf);
}

// ---- criterion 7: curvature parameters from the boundary function ----
void criterion_lqq() {
    auto t0 = std::chrono::steady_clock::now();
    Conic conic = hexagon_inscribed_ellipse(1, 1, 1);
    bool pass = true;
    double worst_l = 0, worst_q = 0;
    int points = 0;
    for (double y : {0.75, 0.9, 1.05, 1.2}) {
        for (bool upper : {false, true}) {
            BoundaryArc arc = conic_arc(conic, upper);
            Q0Jet jet = reconstruct_q0_jet(arc, y);
            CurvatureParams cp = conic_curvature(conic, jet.x0, jet.t0);
            LqqResidual r = lqq_check(jet, cp);
            worst_l = std::max(worst_l, r.l_rel);
            worst_q = std::max(worst_q, r.q_rel);
            ++points;
        }
    }
    pass = pass && points == 8 && worst_l < 0.02 && worst_q < 0.02;
    // Pinned values at the right mid-height point.
    CurvatureParams right = conic_curvature(conic, 1 + std::sqrt(3.0) / 2, 1.0);
    pass = pass && std::fabs(right.l - 0.5) < 0.01 && std::fabs(right.q + 0.4330) < 0.01;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "8 points: max rel err l %.4f q %.4f (gate 0.02); (l,q)=(%.4f,%.4f) (%.0fs)",
                  worst_l, worst_q, right.l, right.q, elapsed(t0));
    report(7, pass, buf);
}

// ---- criterion 8: perturbation responses ----
void criterion_perturbation() {
    auto t0 = std::chrono::steady_clock::now();
    Conic conic = hexagon_inscribed_ellipse(1, 1, 1);
    BoundaryArc arc = conic_arc(conic, true);
    Q0Jet jet = reconstruct_q0_jet(arc, 1.0);
    EndpointShift big = deformed_endpoint_check(jet, 1.01);
    EndpointShift half = deformed_endpoint_check(jet, 1.005);
    double factor = big.residual / half.residual;
    bool pass = factor >= 3.0 && factor <= 5.0;

    ArcQ0Model model(arc, 0.45, 1.55, 300, 12);
    double worst_ratio = 0;
    for (double depth : {0.02, 0.08}) {
        double da = 1e-3;
        InteriorLogCheck chk =
            interior_log_perturbation_check(model, jet.x0, jet.x0 - depth, 1.0, 1.0 + da);
        double order = da / depth + std::sqrt(da);
        worst_ratio = std::max(worst_ratio, chk.rel_residual / order);
    }
    pass = pass && worst_ratio < 10.0;
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "endpoint residual halving factor %.2f (gate [3,5]); interior residual / "
                  "stated order max %.2f (gate 10) (%.0fs)",
                  factor, worst_ratio, elapsed(t0));
    report(8, pass, buf);
}

// ---- criterion 9: derivative identities ----
void criterion_identities(const SolvedShape& fine) {
    auto t0 = std::chrono::steady_clock::now();
    ComplexSlopeField field = complex_slope_field(fine.hc, fine.liq);
    auto ratio = burgers_ratio_residual(field);
    Conic conic = hexagon_inscribed_ellipse(1, 1, 1);
    ArcQ0Model model(conic_arc(conic, true), 0.45, 1.55, 300, 12);
    DerivativeIdentityStats stats = derivative_identity_check(field, model, 10);
    bool pass = ratio.median < 1.0 / 64.0 && stats.nodes > 20 && stats.median_dx < 0.05 &&
                stats.median_dt < 0.05;
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "ratio identity median %.5f (gate mesh=%.5f); jet identities dx %.4f dt %.4f "
                  "over %zu nodes (gate 0.05) (%.0fs)",
                  ratio.median, 1.0 / 64.0, stats.median_dx, stats.median_dt, stats.nodes,
                  elapsed(t0));
    report(9, pass, buf);
}

// ---- criterion 10: concentration scaling ----
void criterion_concentration() {
    auto t0 = std::chrono::steady_clock::now();
    auto spec = hexagon_spec(Rational(1), Rational(1), Rational(1));
    ConcentrationConfig cfg;
    cfg.ns = {16, 32, 64};
    cfg.samples = 200;
    cfg.delta = 0.3;
    cfg.seed = 60001;
    ConcentrationReport rep = concentration_experiment(spec, cfg);
    double m16 = rep.rows[0].median_sup_deviation;
    double m64 = rep.rows[2].median_sup_deviation;
    double worst_perfect = 1.0;
    for (const auto& row : rep.rows) worst_perfect = std::min(worst_perfect, row.perfect_sample_fraction);
    bool pass = m64 / m16 < 2.0 && worst_perfect >= 0.99;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "median sup-dev %.2f/%.2f/%.2f at n=16/32/64, ratio %.2f (gate 2); "
                  "frozen-exact sample fraction min %.3f (gate 0.99) (%.0fs)",
                  rep.rows[0].median_sup_deviation, rep.rows[1].median_sup_deviation,
                  rep.rows[2].median_sup_deviation, m64 / m16, worst_perfect, elapsed(t0));
    report(10, pass, buf);
}

// ---- criterion 11: edge statistics at desk scale ----
void criterion_edge_stats() {
    auto t0 = std::chrono::steady_clock::now();
    HexagonSpec hex{Rational(1), Rational(1), Rational(1)};
    Conic conic = hexagon_inscribed_ellipse(1, 1, 1);
    auto xs = conic.solve_x(1.0);
    EdgeStatsConfig cfg;
    cfg.n = 48;
    cfg.samples = 500;
    cfg.x0 = xs[1];
    cfg.t0 = 1.0;
    cfg.cp = conic_curvature(conic, xs[1], 1.0);
    cfg.seed = 70001;
    EdgeStatsReport rep = edge_statistics_experiment(hex, cfg);
    double stddev = std::sqrt(rep.variance);
    bool pass = rep.mean > -2.05 && rep.mean < -1.45 && stddev > 0.72 && stddev < 1.08 &&
                rep.ks_to_tw < 0.12;
    char buf[240];
    std::snprintf(buf, sizeof buf,
                  "n=48 N=500 [%s]: mean %.3f (gate [-2.05,-1.45]), std %.3f (gate [0.72,1.08]), "
                  "KS %.3f (gate 0.12) (%.0fs)",
                  rep.engine_name.c_str(), rep.mean, stddev, rep.ks_to_tw, elapsed(t0));
    report(11, pass, buf);
}

// ---- criterion 12: special-function numerics ----
void criterion_numerics() {
    auto t0 = std::chrono::steady_clock::now();
    // Series oracles 3^{-2/3}/Gamma(2/3) and -3^{-1/3}/Gamma(1/3).
    double ai0 = 0.35502805388781723926;
    double aip0 = -0.25881940379280679840;
    bool pass = std::fabs(airy_ai(0) - ai0) < 1e-10 && std::fabs(airy_ai_prime(0) - aip0) < 1e-10;
    double k00 = extended_airy_kernel(0, 0, 0, 0);
    pass = pass && std::fabs(k00 - 0.0669875) < 1e-4;
    double mean, var;
    tw_gue_moments(mean, var);
    pass = pass && std::fabs(mean + 1.7711) < 5e-3 && std::fabs(var - 0.8132) < 5e-3;
    char buf[220];
    std::snprintf(buf, sizeof buf,
                  "Ai(0) err %.1e, Ai'(0) err %.1e, K(0,0;0,0)=%.7f, TW mean %.4f var %.4f (%.0fs)",
                  std::fabs(airy_ai(0) - ai0), std::fabs(airy_ai_prime(0) - aip0), k00, mean,
                  var, elapsed(t0));
    report(12, pass, buf);
}

}  // namespace

int main(int argc, char** argv) {
    // `--fast` skips the two long sampling experiments (development aid;
    // the registered test always runs everything).
    bool fast = argc > 1 && std::string(argv[1]) == "--fast";
    auto t0 = std::chrono::steady_clock::now();
    criterion_counting();
    criterion_stationarity();
    criterion_coupling();
    criterion_gibbs();
    SolvedShape coarse = solve_hexagon(1.0 / 32.0);
    SolvedShape fine = solve_hexagon(1.0 / 64.0);
    criterion_limit_shape(fine);
    criterion_burgers(coarse, fine);
    criterion_lqq();
    criterion_perturbation();
    criterion_identities(fine);
    if (!fast) {
        criterion_concentration();
        criterion_edge_stats();
    }
    criterion_numerics();
    std::printf("acceptance: %s (%d failures, %.0fs total)\n", g_failures == 0 ? "PASS" : "FAIL",
                g_failures, elapsed(t0));
    return g_failures == 0 ? 0 : 1;
}
