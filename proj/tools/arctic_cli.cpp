// Command-line front end: sampling, counting, limit shapes, slope checks,
// edge statistics, concentration runs and mixing diagnostics.
//
// Exit codes: 0 success, 1 usage error, 2 infeasible input, 3 capacity.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "arctic/dynamics.hpp"
#include "arctic/edge.hpp"
#include "arctic/enumeration.hpp"
#include "arctic/io.hpp"
#include "arctic/lattice.hpp"
#include "arctic/limitshape.hpp"
#include "arctic/slope.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
    std::string hexagon;  // "a,b,c"
    std::string spec_file;
    long long n = 8;
    std::uint64_t seed = 0;
    int threads = 0;
    std::string out_dir = ".";
};

std::uint64_t env_seed() {
    const char* s = std::getenv("ARCTIC_SEED");
    return s ? std::strtoull(s, nullptr, 10) : 0;
}

int env_threads() {
    const char* s = std::getenv("ARCTIC_THREADS");
    return s ? std::atoi(s) : 0;
}

arctic::PolygonSpec resolve_spec(const CommonArgs& args, long long& n) {
    n = args.n;
    if (!args.spec_file.empty()) {
        std::ifstream in(args.spec_file);
        if (!in) throw arctic::invalid_argument_error("cannot read " + args.spec_file);
        std::stringstream ss;
        ss << in.rdbuf();
        arctic::PolygonSpec spec;
        arctic::domain_spec_from_json(ss.str(), spec, n);
        return spec;
    }
    if (!args.hexagon.empty()) {
        long long a, b, c;
        if (std::sscanf(args.hexagon.c_str(), "%lld,%lld,%lld", &a, &b, &c) != 3)
            throw arctic::invalid_argument_error("--hexagon expects a,b,c");
        return arctic::hexagon_spec(arctic::Rational(a), arctic::Rational(b),
                                    arctic::Rational(c));
    }
    throw arctic::invalid_argument_error("need --hexagon or --spec");
}

void write_out(const CommonArgs& args, const std::string& name, const std::string& content) {
    fs::create_directories(args.out_dir);
    arctic::atomic_write_file((fs::path(args.out_dir) / name).string(), content);
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--hexagon", args.hexagon, "hexagon sides a,b,c");
    cmd->add_option("--spec", args.spec_file, "domain spec JSON file");
    cmd->add_option("--n", args.n, "lattice scale");
    cmd->add_option("--seed", args.seed, "random seed (default: ARCTIC_SEED or 0)");
    cmd->add_option("--threads", args.threads, "worker threads (default: ARCTIC_THREADS)");
    cmd->add_option("--out", args.out_dir, "output directory");
}

int run_sample(const CommonArgs& args, const std::string& steps_opt) {
    long long n;
    arctic::PolygonSpec spec = resolve_spec(args, n);
    arctic::DomainPtr domain = arctic::build_domain(spec, n);
    arctic::BoundaryHeightFn bh = arctic::boundary_height(domain);
    if (!arctic::is_tileable(domain, bh)) {
        std::cerr << "domain is not tileable\n";
        return 2;
    }
    arctic::RngStream rng(args.seed, 1);
    arctic::HeightFunction h;
    std::string engine;
    std::uint64_t steps = 0;
    if (steps_opt == "auto") {
        // Exact sampler when the profile fits, else perfect simulation.
        int span = std::min(domain->width(), domain->height());
        if (span <= 20) {
            h = arctic::exact_sample(domain, bh, rng);
            engine = "exact-dp";
        } else {
            auto res = arctic::perfect_sample_cftp(domain, bh, rng);
            h = std::move(res.sample);
            steps = res.total_updates;
            engine = "cftp";
        }
    } else {
        steps = std::strtoull(steps_opt.c_str(), nullptr, 10);
        auto [lo, hi] = arctic::extremal_heights(domain, bh);
        h = std::move(lo);
        arctic::run_flip_dynamics(h, steps, rng);
        engine = "budget-flips";
    }
    write_out(args, "height.csv", arctic::height_to_csv(h));
    write_out(args, "tiling.svg", arctic::tiling_to_svg(arctic::height_to_tiling(h)));
    json meta;
    meta["format"] = 1;
    meta["engine"] = engine;
    meta["steps"] = steps;
    meta["seed"] = args.seed;
    meta["n"] = n;
    write_out(args, "run.json", meta.dump(2));
    std::cout << meta.dump() << "\n";
    return 0;
}

int run_count(const CommonArgs& args) {
    long long n;
    arctic::PolygonSpec spec = resolve_spec(args, n);
    arctic::DomainPtr domain = arctic::build_domain(spec, n);
    arctic::BoundaryHeightFn bh = arctic::boundary_height(domain);
    std::cout << arctic::count_tilings(domain, bh).to_string() << "\n";
    return 0;
}

int run_limit_shape(const CommonArgs& args, double mesh) {
    if (mesh <= 0) throw arctic::invalid_argument_error("mesh must be positive");
    long long n;
    arctic::PolygonSpec spec = resolve_spec(args, n);
    arctic::SolveReport rep;
    arctic::ContinuumHeight hc = arctic::solve_limit_shape(spec, mesh, {}, &rep);
    arctic::LiquidRegion liq = arctic::extract_liquid_region(hc);
    write_out(args, "limit_shape.csv", arctic::continuum_to_csv(hc));
    json poly = json::array();
    for (const auto& p : liq.arctic_polyline) poly.push_back({p[0], p[1]});
    json meta;
    meta["format"] = 1;
    meta["arctic_polyline"] = poly;
    meta["sweeps"] = rep.sweeps;
    meta["stationarity"] = rep.stationarity;
    meta["entropy"] = rep.entropy;

    // Hexagons get the inscribed-ellipse overlay and its distance.
    const arctic::Conic* ref = nullptr;
    arctic::Conic conic;
    if (spec.vertices.size() == 6) {
        double a = spec.vertices[1].x.as_double();
        double b = spec.vertices[5].y.as_double();
        double c = spec.vertices[2].y.as_double();
        conic = arctic::hexagon_inscribed_ellipse(a, b, c);
        ref = &conic;
        double worst = 0;
        for (const auto& p : liq.arctic_polyline) {
            // Distance proxy: conic value over gradient norm.
            double g = std::hypot(2 * conic.a * p[0] + conic.b * p[1] + conic.d,
                                  conic.b * p[0] + 2 * conic.c * p[1] + conic.e);
            worst = std::max(worst, std::fabs(conic.eval(p[0], p[1])) / std::max(g, 1e-12));
        }
        meta["ellipse_residual"] = worst;
        std::cerr << "max distance to inscribed ellipse ~ " << worst << "\n";
    }
    write_out(args, "arctic.json", meta.dump(2));
    write_out(args, "arctic.svg", arctic::arctic_overlay_svg(hc, liq, ref));
    std::cout << meta.dump() << "\n";
    return 0;
}

int run_slope_checks(const CommonArgs& args, double mesh, double alpha) {
    long long n;
    arctic::PolygonSpec spec = resolve_spec(args, n);
    if (spec.vertices.size() != 6)
        throw arctic::invalid_argument_error("slope checks need a hexagon domain");
    double a = spec.vertices[1].x.as_double();
    double b = spec.vertices[5].y.as_double();
    double c = spec.vertices[2].y.as_double();

    arctic::ContinuumHeight hc = arctic::solve_limit_shape(spec, mesh, {});
    arctic::LiquidRegion liq = arctic::extract_liquid_region(hc);
    arctic::ComplexSlopeField field = arctic::complex_slope_field(hc, liq);
    arctic::Conic conic = arctic::hexagon_inscribed_ellipse(a, b, c);

    json rep;
    rep["format"] = 1;
    auto burgers = arctic::burgers_residual(field);
    auto ratio = arctic::burgers_ratio_residual(field);
    rep["burgers_median"] = burgers.median;
    rep["burgers_nodes"] = burgers.nodes;
    rep["ratio_median"] = ratio.median;

    // Eight sample points on the ellipse, avoiding tangency locations.
    arctic::BoundaryArc right_arc = arctic::conic_arc(conic, true);
    arctic::BoundaryArc left_arc = arctic::conic_arc(conic, false);
    json lqq = json::array();
    double yc = (b + c) * 0.5;
    for (int k = 0; k < 4; ++k) {
        double y = yc + (k - 1.5) * 0.15 * (b + c);
        for (bool upper : {false, true}) {
            try {
                const arctic::BoundaryArc& arc = upper ? right_arc : left_arc;
                arctic::Q0Jet jet = arctic::reconstruct_q0_jet(arc, y);
                arctic::CurvatureParams cp = arctic::conic_curvature(conic, jet.x0, jet.t0);
                arctic::LqqResidual r = arctic::lqq_check(jet, cp);
                lqq.push_back({{"x", jet.x0}, {"t", jet.t0}, {"l_rel", r.l_rel},
                               {"q_rel", r.q_rel}});
            } catch (const arctic::tangency_error&) {
            }
        }
    }
    rep["lqq"] = lqq;

    // Deformation checks at the right mid-height point.
    {
        arctic::Q0Jet jet = arctic::reconstruct_q0_jet(right_arc, yc);
        auto shift1 = arctic::deformed_endpoint_check(jet, alpha);
        rep["endpoint_shift"] = {{"alpha", alpha},
                                 {"predicted", shift1.predicted},
                                 {"solved", shift1.solved},
                                 {"residual", shift1.residual}};
        arctic::ArcQ0Model model(right_arc, yc - 0.55 * (b + c) / 2, yc + 0.55 * (b + c) / 2,
                                 300, 12);
        auto ident = arctic::derivative_identity_check(field, model);
        rep["derivative_identities"] = {{"median_dx", ident.median_dx},
                                        {"median_dt", ident.median_dt},
                                        {"median_ratio", ident.median_ratio},
                                        {"nodes", ident.nodes}};
    }
    write_out(args, "slope_checks.json", rep.dump(2));
    std::cout << rep.dump() << "\n";
    return 0;
}

int run_edge_stats(const CommonArgs& args, std::uint64_t samples, const std::string& engine) {
    long long n;
    arctic::PolygonSpec spec = resolve_spec(args, n);
    if (spec.vertices.size() != 6)
        throw arctic::invalid_argument_error("edge stats need a hexagon domain");
    if (samples == 0) throw arctic::invalid_argument_error("--samples must be positive");
    double a = spec.vertices[1].x.as_double();
    double b = spec.vertices[5].y.as_double();
    double c = spec.vertices[2].y.as_double();
    arctic::Conic conic = arctic::hexagon_inscribed_ellipse(a, b, c);
    double t0 = 0.5 * (b + c);
    auto xs = conic.solve_x(t0);
    if (xs.size() != 2) throw arctic::invalid_argument_error("no arctic point at mid-height");
    double x0 = xs[1];
    arctic::EdgeStatsConfig cfg;
    cfg.n = n;
    cfg.samples = samples;
    cfg.x0 = x0;
    cfg.t0 = t0;
    cfg.cp = arctic::conic_curvature(conic, x0, t0);
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    if (engine == "exact") cfg.engine = arctic::SamplingEngine::kExactDp;
    else if (engine == "cftp") cfg.engine = arctic::SamplingEngine::kCftp;
    else if (engine == "flips") cfg.engine = arctic::SamplingEngine::kBudgetFlips;

    arctic::HexagonSpec hex{arctic::Rational(static_cast<long long>(a)),
                            arctic::Rational(static_cast<long long>(b)),
                            arctic::Rational(static_cast<long long>(c))};
    arctic::EdgeStatsReport rep = arctic::edge_statistics_experiment(hex, cfg);

    json out;
    out["format"] = 1;
    out["samples"] = rep.samples;
    out["mean_x1"] = rep.mean;
    out["std_x1"] = std::sqrt(rep.variance);
    out["ks_to_tw"] = rep.ks_to_tw;
    out["two_time_correlation"] = rep.two_time_correlation;
    out["engine"] = rep.engine_name;
    out["engine_updates"] = rep.engine_updates;
    write_out(args, "edge_stats.json", out.dump(2));
    std::ostringstream csv;
    csv << "x1_t0,x2_t0\n";
    for (std::size_t i = 0; i < rep.x1_t0.size(); ++i)
        csv << rep.x1_t0[i] << "," << rep.x2_t0[i] << "\n";
    write_out(args, "edge_samples.csv", csv.str());
    write_out(args, "edge_hist.svg",
              arctic::histogram_svg(rep.x1_t0, -5, 2.5, 40, [](double x) {
                  return x < -10 ? 0.0 : x > 6 ? 1.0 : arctic::tw_gue_cdf(x);
              }));
    std::cout << out.dump() << "\n";
    return 0;
}

int run_concentration(const CommonArgs& args, const std::string& ns_str, std::uint64_t samples,
                      double delta) {
    long long n;
    arctic::PolygonSpec spec = resolve_spec(args, n);
    arctic::ConcentrationConfig cfg;
    cfg.ns.clear();
    {
        std::stringstream ss(ns_str);
        std::string tok;
        while (std::getline(ss, tok, ',')) cfg.ns.push_back(std::atoll(tok.c_str()));
    }
    if (cfg.ns.empty() || samples == 0)
        throw arctic::invalid_argument_error("need --ns and positive --samples");
    cfg.samples = samples;
    cfg.delta = delta;
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    arctic::ConcentrationReport rep = arctic::concentration_experiment(spec, cfg);
    json out;
    out["format"] = 1;
    out["rows"] = json::array();
    for (const auto& row : rep.rows)
        out["rows"].push_back({{"n", row.n},
                               {"median_sup_deviation", row.median_sup_deviation},
                               {"max_sup_deviation", row.max_sup_deviation},
                               {"frozen_match_fraction", row.frozen_match_fraction},
                               {"perfect_sample_fraction", row.perfect_sample_fraction},
                               {"outside_vertices", row.outside_vertices}});
    write_out(args, "concentration.json", out.dump(2));
    std::cout << out.dump() << "\n";
    return 0;
}

int run_mix_check(const CommonArgs& args, const std::string& dynamics, std::uint64_t draws,
                  std::uint64_t budget) {
    long long n;
    arctic::PolygonSpec spec = resolve_spec(args, n);
    arctic::DomainPtr domain = arctic::build_domain(spec, n);
    arctic::BoundaryHeightFn bh = arctic::boundary_height(domain);
    if (draws == 0) throw arctic::invalid_argument_error("--draws must be positive");
    auto [lo, hi] = arctic::extremal_heights(domain, bh);
    arctic::RngStream rng(args.seed, 7);
    json out;
    out["format"] = 1;
    out["draws"] = draws;
    auto run_one = [&](const std::string& name,
                       const std::function<arctic::HeightFunction()>& sampler) {
        double tv = arctic::stationary_tv(domain, bh, sampler, draws);
        out[name] = tv;
        std::cerr << name << ": TV = " << tv << "\n";
    };
    arctic::HeightFunction start = lo;
    if (dynamics == "flip" || dynamics == "all") {
        run_one("flip", [&]() {
            arctic::HeightFunction h = start;
            arctic::run_flip_dynamics(h, budget, rng);
            return h;
        });
    }
    if (dynamics == "region" || dynamics == "all") {
        arctic::RegionDecomposition bands = arctic::horizontal_bands(domain, 2, 1);
        run_one("region", [&]() {
            arctic::HeightFunction h = start;
            arctic::run_region_flip(h, bands, 8, budget, rng);
            return h;
        });
    }
    if (dynamics == "censored" || dynamics == "all") {
        arctic::RegionDecomposition bands = arctic::horizontal_bands(domain, 2, 1);
        auto p = bands.interior_fractions();
        run_one("censored", [&]() {
            arctic::HeightFunction h = start;
            auto sched = arctic::censor_sequence(p, budget, rng);
            arctic::run_censored(h, bands, sched, rng);
            return h;
        });
    }
    if (dynamics == "alternating" || dynamics == "all") {
        arctic::RegionDecomposition bands = arctic::horizontal_bands(domain, 2, 1);
        run_one("alternating", [&]() {
            arctic::HeightFunction h = start;
            arctic::run_alternating(h, bands, 8, rng);
            return h;
        });
    }
    write_out(args, "mix_check.json", out.dump(2));
    std::cout << out.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uniform lozenge tilings: sampling, limit shapes and edge statistics"};
    app.require_subcommand(1);

    CommonArgs args;
    args.seed = env_seed();
    args.threads = env_threads();

    auto* sample = app.add_subcommand("sample", "draw one uniform tiling");
    CommonArgs a_sample = args;
    add_common(sample, a_sample);
    std::string steps_opt = "auto";
    sample->add_option("--steps", steps_opt, "flip steps or 'auto'");

    auto* count = app.add_subcommand("count", "exact tiling count");
    CommonArgs a_count = args;
    add_common(count, a_count);

    auto* limit = app.add_subcommand("limit-shape", "solve the variational problem");
    CommonArgs a_limit = args;
    add_common(limit, a_limit);
    double mesh = 1.0 / 64.0;
    limit->add_option("--mesh", mesh, "grid spacing (reciprocal integer)");

    auto* slope = app.add_subcommand("slope-checks", "complex-slope identity suite");
    CommonArgs a_slope = args;
    add_common(slope, a_slope);
    double mesh2 = 1.0 / 64.0;
    double alpha = 1.01;
    slope->add_option("--mesh", mesh2, "grid spacing");
    slope->add_option("--alpha", alpha, "deformation parameter");

    auto* edge = app.add_subcommand("edge-stats", "edge statistics experiment");
    CommonArgs a_edge = args;
    add_common(edge, a_edge);
    std::uint64_t samples = 500;
    std::string engine = "auto";
    edge->add_option("--samples", samples, "number of tilings");
    edge->add_option("--engine", engine, "auto|exact|cftp|flips");

    auto* conc = app.add_subcommand("concentration", "height concentration experiment");
    CommonArgs a_conc = args;
    add_common(conc, a_conc);
    std::string ns_str = "16,32,64";
    std::uint64_t conc_samples = 200;
    double delta = 0.3;
    conc->add_option("--ns", ns_str, "comma-separated scales");
    conc->add_option("--samples", conc_samples, "samples per scale");
    conc->add_option("--delta", delta, "neighborhood exponent");

    auto* mix = app.add_subcommand("mix-check", "stationarity diagnostics on small domains");
    CommonArgs a_mix = args;
    add_common(mix, a_mix);
    std::string dynamics = "all";
    std::uint64_t draws = 100000, budget = 400;
    mix->add_option("--dynamics", dynamics, "flip|region|censored|alternating|all");
    mix->add_option("--draws", draws, "number of endpoint draws");
    mix->add_option("--budget", budget, "steps per draw");

    auto* twtab = app.add_subcommand("tw-table", "regenerate the frozen distribution table");
    int tw_nodes = 64;
    twtab->add_option("--nodes", tw_nodes, "quadrature nodes");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sample->parsed()) return run_sample(a_sample, steps_opt);
        if (count->parsed()) return run_count(a_count);
        if (limit->parsed()) return run_limit_shape(a_limit, mesh);
        if (slope->parsed()) return run_slope_checks(a_slope, mesh2, alpha);
        if (edge->parsed()) return run_edge_stats(a_edge, samples, engine);
        if (conc->parsed()) return run_concentration(a_conc, ns_str, conc_samples, delta);
        if (mix->parsed()) return run_mix_check(a_mix, dynamics, draws, budget);
        if (twtab->parsed()) {
            const int size = 1025;
            const double lo = -10.0, hi = 6.0;
            std::ostringstream out;
            out.precision(17);
            out << "// Tracy-Widom GUE distribution table, generated by"
                   " tw_gue_cdf_nystrom\n// (regenerate with: arctic tw-table >"
                   " src/tw_table.inc).\n";
            out << "constexpr double kTwTableLo = " << lo << ";\n";
            out << "constexpr double kTwTableHi = " << hi << ";\n";
            out << "constexpr int kTwTableSize = " << size << ";\n";
            out << "constexpr double kTwTable[] = {\n";
            for (int i = 0; i < size; ++i) {
                double x = lo + (hi - lo) * i / (size - 1);
                double v = std::clamp(arctic::tw_gue_cdf_nystrom(x, tw_nodes), 0.0, 1.0);
                out << "    " << v << ",\n";
                if (i % 64 == 0) std::cerr << "." << std::flush;
            }
            out << "};\n";
            std::cout << out.str();
            std::cerr << "\n";
            return 0;
        }
    } catch (const arctic::capacity_error& e) {
        std::cerr << "capacity: " << e.what() << "\n";
        return 3;
    } catch (const arctic::untileable_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const arctic::infeasible_error& e) {
        std::cerr << "infeasible: " << e.what() << "\n";
        return 2;
    } catch (const arctic::invalid_argument_error& e) {
        std::cerr << "usage: " << e.what() << "\n";
        return 1;
    } catch (const arctic::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
