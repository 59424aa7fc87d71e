#ifndef ARCTIC_EDGE_HPP
#define ARCTIC_EDGE_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "arctic/dynamics.hpp"
#include "arctic/limitshape.hpp"
#include "arctic/rng.hpp"
#include "arctic/tiling.hpp"

namespace arctic {

// Airy function and derivative: Maclaurin series for |x| <= 7 and the
// standard asymptotic expansions beyond; absolute error below 1e-10 on
// |x| <= 200.
double airy_ai(double x);
double airy_ai_prime(double x);

// Extended Airy kernel
//   K(s,x;t,y) =  int_0^inf  e^{u(t-s)} Ai(x+u) Ai(y+u) du   (s >= t)
//   K(s,x;t,y) = -int_-inf^0 e^{u(t-s)} Ai(x+u) Ai(y+u) du   (s < t),
// by adaptive quadrature; absolute error below 1e-8.
double extended_airy_kernel(double s, double x, double t, double y);

// Airy kernel (equal-time) K(x,y) with the removable diagonal.
double airy_kernel(double x, double y);

// Tracy-Widom GUE CDF from the frozen quadrature table on [-10, 6].
double tw_gue_cdf(double x);

// Fredholm-determinant evaluation that generated the table (kept for
// regeneration): Gauss-Legendre Nystrom discretization on a mapped
// half-line with `nodes` points.
double tw_gue_cdf_nystrom(double s, int nodes = 64);

// Mean and variance of the law defined by the frozen table.
void tw_gue_moments(double& mean, double& variance);

struct ScalingConstants {
    double s = 0;  // vertical scale
    double r = 0;  // time scale
};

// s = |l^{2/3} (1-l)^{2/3} / (4^{1/3} q^{1/3})|,
// r = |l^{1/3} (1-l)^{1/3} / (2^{1/3} q^{2/3})|.
ScalingConstants scaling_constants(const CurvatureParams& cp);

// Nearest lattice row for the rescaled time, round-half-even.
long long rescaled_row(double t0, double r_const, long long n, double t);

// X_{i+1}(t) = s^{-1} n^{-1/3} (x_{K-i}(t0 n + r n^{2/3} t) - n x0 - l n^{2/3} t),
// with the walk identified with the midpoint of its unit step edge
// (documented rounding; the half-unit offset vanishes as n grows).
struct RescaledWalks {
    double x0 = 0, t0 = 0;
    long long level_k = 0;
    ScalingConstants sc;
    CurvatureParams cp;
    long long n = 0;

    double value(const WalkEnsemble& walks, int i, double t) const;  // i >= 1
};

enum class SamplingEngine { kAuto, kExactDp, kCftp, kBudgetFlips };

struct EdgeStatsConfig {
    long long n = 48;
    std::uint64_t samples = 500;
    double x0 = 0, t0 = 0;        // arctic point, scaled coordinates
    CurvatureParams cp;           // curvature there
    std::uint64_t seed = 0;
    int threads = 0;              // 0: hardware concurrency
    SamplingEngine engine = SamplingEngine::kAuto;
    std::uint64_t flip_budget = 0;  // used by kBudgetFlips; 0 = heuristic
    std::vector<double> times = {0.0, 1.0};
};

struct EdgeStatsReport {
    std::uint64_t samples = 0;
    std::vector<double> x1_t0;  // X_1(0) per sample (edge midpoints)
    std::vector<double> x2_t0;  // X_2(0)
    double mean = 0, variance = 0;
    // KS uses the continuity correction: integer walk positions are
    // smeared uniformly over their unit edge before comparing with the
    // continuous law (deterministic given the seed).
    double ks_to_tw = 0;
    double two_time_correlation = 0;  // corr(X_1(0), X_1(times[1]))
    std::uint64_t engine_updates = 0;  // total Markov-chain updates spent
    std::string engine_name;
};

// Samples uniform tilings of the scaled hexagon and reports the one-point
// edge statistics at the given arctic point.
EdgeStatsReport edge_statistics_experiment(const HexagonSpec& hex, const EdgeStatsConfig& cfg);

struct ConcentrationConfig {
    std::vector<long long> ns = {16, 32, 64};
    std::uint64_t samples = 200;
    double delta = 0.3;
    std::uint64_t seed = 0;
    int threads = 0;
    SamplingEngine engine = SamplingEngine::kAuto;
    std::uint64_t flip_budget = 0;
    double mesh = 1.0 / 64.0;  // limit-shape resolution
};

struct ConcentrationRow {
    long long n = 0;
    double median_sup_deviation = 0;
    double max_sup_deviation = 0;
    double frozen_match_fraction = 0;      // vertex-wise, aggregated
    double perfect_sample_fraction = 0;    // samples with all outside vertices exact
    std::uint64_t outside_vertices = 0;
};

struct ConcentrationReport {
    std::vector<ConcentrationRow> rows;
};

ConcentrationReport concentration_experiment(const PolygonSpec& spec,
                                             const ConcentrationConfig& cfg);

// Deviation metric of an arbitrary integer field against n H*; used by
// the experiment and directly testable on deterministic inputs.
double sup_deviation(const std::vector<int>& values, const LatticeDomain& lattice,
                     const ContinuumHeight& hc);

struct BarrierConfig {
    double l = 0.5;
    double q = 0.4330127018922193;  // positive by convention
    long long n = 48;
    double delta = 0.05;
    std::uint64_t samples = 200;
    std::uint64_t seed = 0;
    std::uint64_t sweeps = 0;  // 0: heuristic budget
    // Entrance/exit data, generated when empty: d_j = ceil(f(-T)) + j.
    std::vector<long long> entrance, exit_data;
};

struct BarrierReport {
    long long walks = 0, horizon = 0;
    std::vector<double> x1_t0;
    double mean = 0, variance = 0, ks_to_tw = 0;
};

// Non-intersecting Bernoulli walks over [-T, T] above the hard quadratic
// barrier f(s) = l s + q s^2 / n - K0, K0 = s^{3/2} n^{1/3} (3 pi m/2)^{2/3},
// with m = floor(n^{10 delta}) walks and T = floor(n^{2/3 + 20 delta});
// sampled by single-site updates and rescaled at t = 0.
BarrierReport quadratic_barrier_experiment(const BarrierConfig& cfg);

}  // namespace arctic

#endif
