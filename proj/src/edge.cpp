#include "arctic/edge.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "arctic/errors.hpp"
#include "arctic/stats.hpp"

namespace arctic {

namespace {
constexpr double kPi = 3.14159265358979323846;

int hardware_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}
}  // namespace

ScalingConstants scaling_constants(const CurvatureParams& cp) {
    if (std::fabs(cp.l) < 1e-12 || std::fabs(cp.l - 1.0) < 1e-12)
        throw domain_error("scaling_constants: l in {0,1}");
    if (std::fabs(cp.q) < 1e-12 || !std::isfinite(cp.q))
        throw domain_error("scaling_constants: q in {0,inf}");
    ScalingConstants sc;
    sc.s = std::fabs(std::pow(std::fabs(cp.l), 2.0 / 3.0) *
                     std::pow(std::fabs(1.0 - cp.l), 2.0 / 3.0) /
                     (std::pow(4.0, 1.0 / 3.0) * std::pow(std::fabs(cp.q), 1.0 / 3.0)));
    sc.r = std::fabs(std::pow(std::fabs(cp.l), 1.0 / 3.0) *
                     std::pow(std::fabs(1.0 - cp.l), 1.0 / 3.0) /
                     (std::pow(2.0, 1.0 / 3.0) * std::pow(std::fabs(cp.q), 2.0 / 3.0)));
    return sc;
}

long long rescaled_row(double t0, double r_const, long long n, double t) {
    double raw = t0 * static_cast<double>(n) +
                 r_const * std::pow(static_cast<double>(n), 2.0 / 3.0) * t;
    // round-half-even
    double fl = std::floor(raw);
    double frac = raw - fl;
    long long base = static_cast<long long>(fl);
    if (frac > 0.5) return base + 1;
    if (frac < 0.5) return base;
    return base % 2 == 0 ? base : base + 1;
}

double RescaledWalks::value(const WalkEnsemble& walks, int i, double t) const {
    if (i < 1) throw invalid_argument_error("walk label starts at 1");
    long long row = rescaled_row(t0, sc.r, n, t);
    int pos = walks.position(static_cast<int>(level_k) - (i - 1), static_cast<int>(row));
    double nn = static_cast<double>(n);
    return (static_cast<double>(pos) + 0.5 - nn * x0 - cp.l * std::pow(nn, 2.0 / 3.0) * t) /
           (sc.s * std::pow(nn, 1.0 / 3.0));
}

namespace {

struct SampleOutput {
    std::vector<double> x1_by_time;
    double x1_jittered = 0;
    double x2_t0 = 0;
    std::uint64_t updates = 0;
};

// Position of walk with the given label on one row, straight from the
// height values (label of the walk through horizontal edge [x, x+1] is
// H(x+1)).
int walk_position_on_row(const HeightFunction& h, int row, int label, bool& found) {
    const LatticeDomain& d = *h.domain();
    for (int x = d.x1() - 1; x >= d.x0(); --x) {
        if (!d.contains(x, row) || !d.contains(x + 1, row)) continue;
        if (h.at(x + 1, row) == h.at(x, row) + 1 && h.at(x + 1, row) == label) {
            found = true;
            return x;
        }
    }
    found = false;
    return 0;
}

}  // namespace

namespace {

// Budget for the single-flip engine: twice the worst observed forward
// coalescence time of the extremal pair.  For monotone chains the
// total-variation distance from any start is bounded by the probability
// that the extremal chains have not met.
std::uint64_t calibrated_flip_budget(const DomainPtr& domain, const BoundaryHeightFn& bh,
                                     std::uint64_t seed, int probes = 2) {
    std::uint64_t worst = 0;
    for (int p = 0; p < probes; ++p) {
        RngStream rng(seed ^ 0xc0a1e5ce, static_cast<std::uint64_t>(p) + 1);
        worst = std::max(worst, coalescence_time(domain, bh, rng, ~0ull >> 1));
    }
    return 2 * worst;
}

SamplingEngine resolve_engine(SamplingEngine requested, const LatticeDomain& domain) {
    if (requested != SamplingEngine::kAuto) return requested;
    int span = std::min(domain.width(), domain.height());
    if (span <= 20) return SamplingEngine::kExactDp;
    if (domain.interior_vertices().size() <= 1200) return SamplingEngine::kCftp;
    return SamplingEngine::kBudgetFlips;
}

}  // namespace

EdgeStatsReport edge_statistics_experiment(const HexagonSpec& hex, const EdgeStatsConfig& cfg) {
    if (cfg.samples == 0) throw invalid_argument_error("need at least one sample");
    PolygonSpec spec = hexagon_spec(hex);
    DomainPtr domain = build_domain(spec, cfg.n);
    BoundaryHeightFn bh = boundary_height(domain);

    SamplingEngine engine = resolve_engine(cfg.engine, *domain);

    ScalingConstants sc = scaling_constants(cfg.cp);
    RescaledWalks rescale{cfg.x0, cfg.t0, 0, sc, cfg.cp, cfg.n};
    // Level at the reference point: n H*(x0, t0); for the hexagon's right
    // edge point this is the top walk label n * h(right corner).
    // Derive it from the boundary data: the frozen value just right of x0.
    {
        int row = static_cast<int>(std::llround(cfg.t0 * static_cast<double>(cfg.n)));
        int xr = domain->x1();
        while (xr > domain->x0() && !domain->contains(xr, row)) --xr;
        rescale.level_k = bh.at(xr, row);
    }

    const int threads = hardware_threads(cfg.threads);
    std::vector<SampleOutput> outputs(cfg.samples);
    std::optional<ExactSampler> exact;
    if (engine == SamplingEngine::kExactDp) exact.emplace(domain, bh);
    std::atomic<std::uint64_t> next{0};

    std::uint64_t flip_budget = cfg.flip_budget;
    if (engine == SamplingEngine::kBudgetFlips && flip_budget == 0)
        flip_budget = calibrated_flip_budget(domain, bh, cfg.seed);

    auto worker = [&]() {
        for (;;) {
            std::uint64_t id = next.fetch_add(1);
            if (id >= cfg.samples) return;
            RngStream stream(cfg.seed, id + 1);
            HeightFunction h;
            std::uint64_t updates = 0;
            switch (engine) {
                case SamplingEngine::kExactDp: {
                    h = exact->sample(stream);
                    break;
                }
                case SamplingEngine::kCftp: {
                    CftpResult res = perfect_sample_cftp(domain, bh, stream);
                    h = std::move(res.sample);
                    updates = res.total_updates;
                    break;
                }
                default: {
                    auto [lo, hi] = extremal_heights(domain, bh);
                    h = std::move(lo);
                    run_flip_dynamics(h, flip_budget, stream);
                    updates = flip_budget;
                    break;
                }
            }
            SampleOutput out;
            out.updates = updates;
            const double nn = static_cast<double>(cfg.n);
            const double unit = sc.s * std::pow(nn, 1.0 / 3.0);
            int label1 = static_cast<int>(rescale.level_k);
            for (double t : cfg.times) {
                long long row = rescaled_row(cfg.t0, sc.r, cfg.n, t);
                bool found = false;
                int pos = walk_position_on_row(h, static_cast<int>(row), label1, found);
                if (!found) throw range_error("top walk not present on the requested row");
                double mid = static_cast<double>(pos) + 0.5;
                out.x1_by_time.push_back(
                    (mid - nn * cfg.x0 - cfg.cp.l * std::pow(nn, 2.0 / 3.0) * t) / unit);
                if (t == cfg.times.front()) {
                    double u = stream.next_double();  // continuity correction
                    out.x1_jittered =
                        (static_cast<double>(pos) + u - nn * cfg.x0 -
                         cfg.cp.l * std::pow(nn, 2.0 / 3.0) * t) / unit;
                }
            }
            {
                long long row = rescaled_row(cfg.t0, sc.r, cfg.n, cfg.times.empty() ? 0 : cfg.times[0]);
                bool found = false;
                int pos = walk_position_on_row(h, static_cast<int>(row), label1 - 1, found);
                out.x2_t0 = found ? (static_cast<double>(pos) + 0.5 - nn * cfg.x0) / unit : 0.0;
            }
            outputs[id] = std::move(out);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();

    EdgeStatsReport rep;
    rep.samples = cfg.samples;
    rep.engine_name = engine == SamplingEngine::kExactDp  ? "exact-dp"
                      : engine == SamplingEngine::kCftp   ? "cftp"
                                                          : "budget-flips";
    std::vector<double> x1_second, x1_jit;
    for (const auto& out : outputs) {
        rep.x1_t0.push_back(out.x1_by_time.at(0));
        if (out.x1_by_time.size() > 1) x1_second.push_back(out.x1_by_time[1]);
        x1_jit.push_back(out.x1_jittered);
        rep.x2_t0.push_back(out.x2_t0);
        rep.engine_updates += out.updates;
    }
    rep.mean = sample_mean(rep.x1_t0);
    rep.variance = sample_variance(rep.x1_t0);
    rep.ks_to_tw = ks_distance(x1_jit, [](double x) {
        if (x < -10) return 0.0;
        if (x > 6) return 1.0;
        return tw_gue_cdf(x);
    });
    if (!x1_second.empty()) rep.two_time_correlation = correlation(rep.x1_t0, x1_second);
    return rep;
}

double sup_deviation(const std::vector<int>& values, const LatticeDomain& lattice,
                     const ContinuumHeight& hc) {
    const long long n = lattice.scale();
    double worst = 0;
    for (const Vertex& v : lattice.vertices()) {
        double target = static_cast<double>(n) *
                        hc.value(static_cast<double>(v.x) / n, static_cast<double>(v.y) / n);
        worst = std::max(worst, std::fabs(values[lattice.index(v.x, v.y)] - target));
    }
    return worst;
}

namespace {

// Affine description of one frozen component: n H*(v) = a n + b x + c y
// with (b,c) one of the frozen gradients.
struct FrozenPatch {
    int b = 0, c = 0;
    double a = 0;  // continuum offset
};

// Frozen value at a mesh cell, from the solved field.
std::optional<FrozenPatch> cell_patch(const ContinuumHeight& hc, int i, int j) {
    if (!hc.cell_in_domain(i, j)) return std::nullopt;
    HeightGradient g = hc.cell_gradient(i, j);
    // Snap to the nearest frozen gradient.
    const int bs[3] = {0, 1, 1};
    const int cs[3] = {0, 0, -1};
    int best = 0;
    double bd = 1e300;
    for (int k = 0; k < 3; ++k) {
        double d2 = (g.dx - bs[k]) * (g.dx - bs[k]) + (g.dy - cs[k]) * (g.dy - cs[k]);
        if (d2 < bd) {
            bd = d2;
            best = k;
        }
    }
    if (bd > 0.02) return std::nullopt;  // not actually frozen
    const double m = hc.mesh();
    FrozenPatch p;
    p.b = bs[best];
    p.c = cs[best];
    p.a = hc.at_node(i, j) - p.b * (i * m) - p.c * (j * m);
    return p;
}

}  // namespace

ConcentrationReport concentration_experiment(const PolygonSpec& spec,
                                             const ConcentrationConfig& cfg) {
    if (cfg.samples == 0) throw invalid_argument_error("need at least one sample");
    SolveOptions sopts;
    ContinuumHeight hc = solve_limit_shape(spec, cfg.mesh, sopts);
    LiquidRegion liq = extract_liquid_region(hc);
    std::vector<std::uint8_t> augmented = augmented_region(hc, liq, cfg.delta, 1);

    ConcentrationReport report;
    for (long long n : cfg.ns) {
        DomainPtr domain = build_domain(spec, n);
        BoundaryHeightFn bh = boundary_height(domain);
        // Augmented mask is n-dependent through the neighborhood radius.
        std::vector<std::uint8_t> aug = augmented_region(hc, liq, cfg.delta, n);
        const LatticeDomain& grid = *hc.grid();
        const double m = hc.mesh();

        // Frozen targets for lattice vertices outside the augmented region.
        struct Outside {
            Vertex v;
            long long target;
        };
        std::vector<Outside> outside;
        for (const Vertex& v : domain->vertices()) {
            double x = static_cast<double>(v.x) / n, y = static_cast<double>(v.y) / n;
            int ci = std::clamp(static_cast<int>(std::floor(x / m)), grid.x0(), grid.x1() - 1);
            int cj = std::clamp(static_cast<int>(std::floor(y / m)), grid.y0(), grid.y1() - 1);
            if (!hc.cell_in_domain(ci, cj)) continue;
            if (aug[grid.index(ci, cj)]) continue;
            auto patch = cell_patch(hc, ci, cj);
            if (!patch) continue;
            double an = patch->a * static_cast<double>(n);
            long long an_int = std::llround(an);
            if (std::fabs(an - static_cast<double>(an_int)) > 0.05) continue;
            outside.push_back({v, an_int + patch->b * v.x + patch->c * v.y});
        }

        SamplingEngine engine = resolve_engine(cfg.engine, *domain);
        std::optional<ExactSampler> exact;
        if (engine == SamplingEngine::kExactDp) exact.emplace(domain, bh);
        std::uint64_t flip_budget = cfg.flip_budget;
        if (engine == SamplingEngine::kBudgetFlips && flip_budget == 0)
            flip_budget = calibrated_flip_budget(domain, bh, cfg.seed);

        std::vector<double> sups(cfg.samples, 0.0);
        std::vector<std::uint64_t> matches(cfg.samples, 0);
        std::vector<std::uint8_t> perfect(cfg.samples, 0);
        std::atomic<std::uint64_t> next{0};
        auto worker = [&]() {
            for (;;) {
                std::uint64_t id = next.fetch_add(1);
                if (id >= cfg.samples) return;
                RngStream stream(cfg.seed ^ (0x5bd1e995u * static_cast<std::uint64_t>(n)),
                                 id + 1);
                HeightFunction h;
                switch (engine) {
                    case SamplingEngine::kExactDp:
                        h = exact->sample(stream);
                        break;
                    case SamplingEngine::kCftp:
                        h = perfect_sample_cftp(domain, bh, stream).sample;
                        break;
                    default: {
                        auto [lo2, hi2] = extremal_heights(domain, bh);
                        h = std::move(lo2);
                        run_flip_dynamics(h, flip_budget, stream);
                        break;
                    }
                }
                sups[id] = sup_deviation(h.raw(), *domain, hc);
                std::uint64_t match = 0;
                for (const auto& o : outside)
                    if (h.at(o.v.x, o.v.y) == o.target) ++match;
                matches[id] = match;
                perfect[id] = (match == outside.size()) ? 1 : 0;
            }
        };
        const int threads = hardware_threads(cfg.threads);
        std::vector<std::thread> pool;
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();

        ConcentrationRow row;
        row.n = n;
        std::vector<double> sorted = sups;
        std::sort(sorted.begin(), sorted.end());
        row.median_sup_deviation = sorted[sorted.size() / 2];
        row.max_sup_deviation = sorted.back();
        std::uint64_t total_matches = 0, total_perfect = 0;
        for (std::uint64_t i = 0; i < cfg.samples; ++i) {
            total_matches += matches[i];
            total_perfect += perfect[i];
        }
        row.outside_vertices = outside.size();
        row.frozen_match_fraction =
            outside.empty() ? 1.0
                            : static_cast<double>(total_matches) /
                                  (static_cast<double>(outside.size()) *
                                   static_cast<double>(cfg.samples));
        row.perfect_sample_fraction =
            static_cast<double>(total_perfect) / static_cast<double>(cfg.samples);
        report.rows.push_back(row);
    }
    return report;
}

BarrierReport quadratic_barrier_experiment(const BarrierConfig& cfg) {
    if (cfg.samples == 0) throw invalid_argument_error("need at least one sample");
    const double nn = static_cast<double>(cfg.n);
    const long long m = static_cast<long long>(std::floor(std::pow(nn, 10.0 * cfg.delta)));
    const long long horizon =
        static_cast<long long>(std::floor(std::pow(nn, 2.0 / 3.0 + 20.0 * cfg.delta)));
    if (m < 1 || horizon < 2) throw invalid_argument_error("degenerate scales");
    CurvatureParams cp{cfg.l, cfg.q};
    ScalingConstants sc = scaling_constants(cp);
    const double k0 = std::pow(sc.s, 1.5) * std::pow(nn, 1.0 / 3.0) *
                      std::pow(1.5 * kPi * static_cast<double>(m), 2.0 / 3.0);
    auto barrier = [&](long long tau) {
        double s = static_cast<double>(tau);
        return cfg.l * s + cfg.q * s * s / nn - k0;
    };

    const std::size_t rows = static_cast<std::size_t>(2 * horizon + 1);
    std::vector<long long> d(m), e(m);
    const double tol = std::pow(nn, 1.0 / 3.0 + 10.0 * cfg.delta);
    for (long long j = 0; j < m; ++j) {
        d[j] = cfg.entrance.empty()
                   ? static_cast<long long>(std::ceil(barrier(-horizon))) + j + 1
                   : cfg.entrance.at(j);
        e[j] = cfg.exit_data.empty()
                   ? static_cast<long long>(std::ceil(barrier(horizon))) + j + 1
                   : cfg.exit_data.at(j);
        if (std::fabs(static_cast<double>(d[j]) - barrier(-horizon)) >= tol ||
            std::fabs(static_cast<double>(e[j]) - barrier(horizon)) >= tol)
            throw infeasible_error("entrance/exit datum " + std::to_string(j) +
                                   " violates the closeness tolerance");
    }

    // Minimal feasible configuration: push every walk down onto its
    // envelope, from the bottom walk up.
    std::vector<std::vector<long long>> base(m, std::vector<long long>(rows));
    for (long long j = 0; j < m; ++j) {
        for (std::size_t r = 0; r < rows; ++r) {
            long long tau = static_cast<long long>(r) - horizon;
            long long lo = std::max(d[j], e[j] - (horizon - tau));
            lo = std::max(lo, static_cast<long long>(std::ceil(barrier(tau))));
            if (j > 0) lo = std::max(lo, base[j - 1][r] + 1);
            long long hi = std::min(d[j] + (tau + horizon), e[j]);
            if (lo > hi) throw infeasible_error("no walk configuration fits the data");
            base[j][r] = lo;
        }
        // Enforce Bernoulli steps by a forward pass (lo envelope may jump
        // by more than one only downward in tau, never upward).
        for (std::size_t r = 1; r < rows; ++r)
            base[j][r] = std::max(base[j][r], base[j][r - 1]);
    }

    std::uint64_t sweeps = cfg.sweeps;
    if (sweeps == 0)
        sweeps = static_cast<std::uint64_t>(
            64.0 * static_cast<double>(m) * static_cast<double>(horizon) *
            std::log(static_cast<double>(m * horizon + 2)));

    BarrierReport rep;
    rep.walks = m;
    rep.horizon = horizon;
    const std::size_t sites = static_cast<std::size_t>(m) * (rows - 2);
    for (std::uint64_t s = 0; s < cfg.samples; ++s) {
        RngStream rng(cfg.seed, s + 1);
        auto pos = base;
        std::uint64_t steps = sweeps * sites / 8;
        for (std::uint64_t it = 0; it < steps; ++it) {
            std::uint64_t pick = rng.uniform_below(sites);
            bool up = rng.next_bit();
            long long j = static_cast<long long>(pick % static_cast<std::size_t>(m));
            std::size_t r = 1 + pick / static_cast<std::size_t>(m);
            long long tau = static_cast<long long>(r) - horizon;
            long long cur = pos[j][r];
            long long cand = cur + (up ? 1 : -1);
            // Bernoulli window against the two time neighbors.
            if (cand < pos[j][r - 1] || cand > pos[j][r - 1] + 1) continue;
            if (pos[j][r + 1] < cand || pos[j][r + 1] > cand + 1) continue;
            // Ordering and the hard barrier.
            if (j > 0 && cand <= pos[j - 1][r]) continue;
            if (j + 1 < m && cand >= pos[j + 1][r]) continue;
            if (static_cast<double>(cand) < barrier(tau)) continue;
            pos[j][r] = cand;
        }
        double x1 = (static_cast<double>(pos[m - 1][static_cast<std::size_t>(horizon)])) /
                    (sc.s * std::pow(nn, 1.0 / 3.0));
        rep.x1_t0.push_back(x1);
    }
    rep.mean = sample_mean(rep.x1_t0);
    rep.variance = rep.x1_t0.size() > 1 ? sample_variance(rep.x1_t0) : 0.0;
    rep.ks_to_tw = ks_distance(rep.x1_t0, [](double x) {
        if (x < -10) return 0.0;
        if (x > 6) return 1.0;
        return tw_gue_cdf(x);
    });
    return rep;
}

}  // namespace arctic
