#include "arctic/slope.hpp"

#include <algorithm>
#include <cmath>

#include "arctic/errors.hpp"

namespace arctic {

namespace {
constexpr double kPi = 3.14159265358979323846;

double median_of(std::vector<double> v) {
    if (v.empty()) return 0;
    std::sort(v.begin(), v.end());
    std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}
}  // namespace

double arg_star(Complex z) {
    if (z.imag() > 1e-14) throw domain_error("arg_star: point above the real axis");
    double a = std::atan2(std::min(z.imag(), 0.0), z.real());
    return a;  // atan2 with nonpositive imaginary part lies in [-pi, 0]
}

Complex slope_to_f(HeightGradient g) {
    // Angles of the triangle with vertices 0, -1, f are pi times the tile
    // fractions: p1 = 1 - dx at 0, p2 = -dy at -1, p3 = dx + dy at f.
    double p1 = 1.0 - g.dx;
    double p2 = -g.dy;
    double p3 = g.dx + g.dy;
    const double eps = 1e-13;
    if (p1 < -eps || p1 > 1 + eps || p2 < -eps || p2 > 1 + eps || p3 < -eps || p3 > 1 + eps)
        throw domain_error("slope_to_f: gradient outside the admissible triangle");
    if (p1 <= eps || p2 <= eps || p3 <= eps) {
        // Degenerate triangle: each open side of the gradient triangle
        // collapses f to one point of the extended real axis.
        int zeros = (p1 <= eps) + (p2 <= eps) + (p3 <= eps);
        if (zeros > 1)
            throw domain_error("slope_to_f: frozen corner has no unique boundary value");
        if (p2 <= eps) return Complex(0, 0);       // no down-jumps
        if (p1 <= eps) return Complex(-1, 0);      // full walk density
        return Complex(1e300, 0);                  // no squares: f escapes to +inf
    }
    // Law of sines: |f| / sin(pi p2) = |-1 - 0| / sin(pi p3).
    double r = std::sin(kPi * p2) / std::sin(kPi * p3);
    double theta = -kPi * g.dx;
    return Complex(r * std::cos(theta), r * std::sin(theta));
}

HeightGradient f_to_slope(Complex f) {
    if (std::abs(f) < 1e-15 || std::abs(f + 1.0) < 1e-15)
        throw domain_error("f_to_slope: singular at f in {0,-1}");
    double s = -arg_star(f) / kPi;
    double t = arg_star(f + 1.0) / kPi;
    return {s, t};
}

ComplexSlopeField complex_slope_field(const ContinuumHeight& hc, const LiquidRegion& liq,
                                      double margin) {
    const LatticeDomain& d = *hc.grid();
    ComplexSlopeField field;
    field.grid = hc.grid();
    field.mesh = hc.mesh();
    field.f.assign(d.box_size(), Complex(0, 0));
    field.present.assign(d.box_size(), 0);
    auto cell_liquid = [&](int i, int j) {
        if (i < d.x0() || i >= d.x1() || j < d.y0() || j >= d.y1()) return false;
        return liq.cell_mask[d.index(i, j)] != 0;
    };
    for (const Vertex& v : d.interior_vertices()) {
        // All four incident cells must be liquid so the centered stencil
        // stays off the frozen set.
        if (!cell_liquid(v.x, v.y) || !cell_liquid(v.x - 1, v.y) || !cell_liquid(v.x, v.y - 1) ||
            !cell_liquid(v.x - 1, v.y - 1))
            continue;
        HeightGradient g = hc.node_gradient(v.x, v.y);
        Slope sl = slope_from_gradient(g);
        if (slope_margin(sl) <= margin) continue;
        field.f[d.index(v.x, v.y)] = slope_to_f(g);
        field.present[d.index(v.x, v.y)] = 1;
    }
    return field;
}

namespace {

// Nodes whose full centered stencil is present and at graph distance at
// least `guard` from the field edge.
std::vector<Vertex> guarded_nodes(const ComplexSlopeField& field, int guard) {
    const LatticeDomain& d = *field.grid;
    std::vector<Vertex> nodes;
    for (const Vertex& v : d.interior_vertices()) {
        if (!field.has(v.x, v.y)) continue;
        bool ok = true;
        for (int dj = -guard; dj <= guard && ok; ++dj)
            for (int di = -guard; di <= guard && ok; ++di) {
                if (!d.contains(v.x + di, v.y + dj) || !field.has(v.x + di, v.y + dj)) ok = false;
            }
        if (ok) nodes.push_back(v);
    }
    return nodes;
}

}  // namespace

BurgersResidual burgers_residual(const ComplexSlopeField& field, int guard) {
    const double m = field.mesh;
    BurgersResidual out;
    for (const Vertex& v : guarded_nodes(field, guard)) {
        Complex f = field.at(v.x, v.y);
        Complex fx = (field.at(v.x + 1, v.y) - field.at(v.x - 1, v.y)) / (2 * m);
        Complex ft = (field.at(v.x, v.y + 1) - field.at(v.x, v.y - 1)) / (2 * m);
        Complex res = ft + fx * f / (f + 1.0);
        out.residuals.push_back(std::abs(res));
    }
    out.nodes = out.residuals.size();
    out.median = median_of(out.residuals);
    return out;
}

BurgersResidual burgers_ratio_residual(const ComplexSlopeField& field, int guard) {
    const double m = field.mesh;
    BurgersResidual out;
    for (const Vertex& v : guarded_nodes(field, guard)) {
        Complex f = field.at(v.x, v.y);
        Complex fx = (field.at(v.x + 1, v.y) - field.at(v.x - 1, v.y)) / (2 * m);
        Complex ft = (field.at(v.x, v.y + 1) - field.at(v.x, v.y - 1)) / (2 * m);
        if (std::abs(fx) < 1e-12) continue;
        Complex res = ft / fx + f / (f + 1.0);
        out.residuals.push_back(std::abs(res));
    }
    out.nodes = out.residuals.size();
    out.median = median_of(out.residuals);
    return out;
}

namespace {

SqrtFit loglog_fit(const std::vector<std::pair<double, double>>& pts) {
    if (pts.size() < 4) throw not_found_error("too few points for the edge fit");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : pts) {
        double lx = std::log(x), ly = std::log(y);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double n = static_cast<double>(pts.size());
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double inter = (sy - slope * sx) / n;
    return {std::exp(inter), slope, pts.size()};
}

}  // namespace

SqrtFit edge_sqrt_fit(const ComplexSlopeField& field, double x0, double t0, int side,
                      int window) {
    const LatticeDomain& d = *field.grid;
    const double m = field.mesh;
    int j = static_cast<int>(std::llround(t0 / m));
    int i0 = static_cast<int>(std::llround(x0 / m));
    // First field node strictly inside from the boundary point.
    int start = i0;
    while (d.contains(start, j) && !field.has(start, j)) start -= side;
    if (!d.contains(start, j) || !field.has(start - side, j))
        throw not_found_error("no field nodes on the approach row");
    // Work in z = f/(f+1): the square-root approach survives to larger
    // depths there, and the boundary value follows by linear
    // extrapolation of the slowly varying real part.
    auto zval = [&](int i) {
        Complex f = field.at(i, j);
        return f / (f + 1.0);
    };
    Complex z_edge;
    {
        double d1 = std::fabs(start * m - x0);
        double d2 = std::fabs((start - side) * m - x0);
        double r1 = zval(start).real();
        double r2 = zval(start - side).real();
        z_edge = Complex(r1 + (r1 - r2) * d1 / (d2 - d1), 0);
    }
    std::vector<std::pair<double, double>> pts;
    for (int k = 2; k <= window; ++k) {
        int i = i0 - side * k;
        if (!d.contains(i, j) || !field.has(i, j)) continue;
        double dist = std::fabs(static_cast<double>(i) * m - x0);
        double dev = std::abs(zval(i) - z_edge);
        if (dist > 0 && dev > 0) pts.emplace_back(dist, dev);
    }
    if (pts.size() < 4) throw not_found_error("insufficient data for edge fit");
    return loglog_fit(pts);
}

SqrtFit edge_sqrt_fit_gradient(const ContinuumHeight& hc, double x0, double t0, int side,
                               int window) {
    const LatticeDomain& d = *hc.grid();
    const double m = hc.mesh();
    int j = static_cast<int>(std::llround(t0 / m));
    int i0 = static_cast<int>(std::llround(x0 / m));
    // Frozen d_x H just outside the boundary point.
    double frozen;
    {
        int io = i0 + side * 2;
        io = std::clamp(io, d.x0() + 1, d.x1() - 1);
        frozen = (hc.at_node(io + 1, j) - hc.at_node(io - 1, j)) / (2 * m);
        frozen = std::round(frozen);
    }
    std::vector<std::pair<double, double>> pts;
    for (int k = 2; k <= window; ++k) {
        int i = i0 - side * k;
        if (!d.contains(i - 1, j) || !d.contains(i + 1, j)) continue;
        double g = (hc.at_node(i + 1, j) - hc.at_node(i - 1, j)) / (2 * m);
        double dist = std::fabs(static_cast<double>(i) * m - x0);
        double dev = std::fabs(g - frozen);
        if (dist > 0 && dev > 1e-12) pts.emplace_back(dist, dev);
    }
    if (pts.size() < 4) throw not_found_error("insufficient data for gradient edge fit");
    return loglog_fit(pts);
}

BoundaryArc conic_arc(const Conic& conic, bool upper_branch) {
    // Parameter is the y-coordinate; x follows the chosen branch.
    auto solve = [conic, upper_branch](double y) {
        auto xs = conic.solve_x(y);
        if (xs.empty()) throw not_found_error("conic arc: no point at this height");
        return upper_branch ? xs.back() : xs.front();
    };
    BoundaryArc arc;
    arc.x = solve;
    arc.t = [](double th) { return th; };
    arc.slope_xy = [conic, solve](double th) {
        double x = solve(th);
        return conic.dx_dy(x, th);
    };
    return arc;
}

Q0Jet reconstruct_q0_jet(const BoundaryArc& arc, double th0, double dth) {
    // On the boundary f is real with f/(f+1) equal to the tangent dx/dy,
    // and Q0'(f) = x - t; differencing along the arc yields Q0'' and Q0'''.
    auto f_of = [&](double th) {
        double l = arc.slope_xy(th);
        double denom = 1.0 - l;
        if (std::fabs(denom) < 1e-12) throw tangency_error("tangent slope 1 on the arc");
        return l / denom;
    };
    auto w_of = [&](double th) { return arc.x(th) - arc.t(th); };  // = Q0'(f(th))

    double f0 = f_of(th0);
    double fp = (f_of(th0 + dth) - f_of(th0 - dth)) / (2 * dth);
    double fpp = (f_of(th0 + dth) - 2 * f0 + f_of(th0 - dth)) / (dth * dth);
    double w0 = w_of(th0);
    double wp = (w_of(th0 + dth) - w_of(th0 - dth)) / (2 * dth);
    double wpp = (w_of(th0 + dth) - 2 * w0 + w_of(th0 - dth)) / (dth * dth);
    if (std::fabs(fp) < 1e-12) throw tangency_error("stationary f along the arc");
    // Chain rule: w = Q0'(f) so Q0'' = w'/f', Q0''' = (w'' - Q0'' f'')/f'^2.
    double q0pp = wp / fp;
    double q0ppp = (wpp - q0pp * fpp) / (fp * fp);
    Q0Jet jet;
    jet.f0 = f0;
    jet.x0 = arc.x(th0);
    jet.t0 = arc.t(th0);
    jet.q0 = jet.x0 * (f0 + 1.0) - jet.t0 * f0;
    jet.q0p = w0;
    jet.q0pp = q0pp;
    jet.q0ppp = q0ppp;
    return jet;
}

LqqResidual lqq_check(const Q0Jet& jet, const CurvatureParams& geometric) {
    LqqResidual r;
    r.l_formula = jet.f0 / (jet.f0 + 1.0);
    r.q_formula = -0.5 / (std::pow(jet.f0 + 1.0, 3.0) * jet.q0pp);
    r.l_geometric = geometric.l;
    r.q_geometric = geometric.q;
    r.l_rel = std::fabs(r.l_formula - r.l_geometric) / std::max(1e-12, std::fabs(r.l_geometric));
    r.q_rel = std::fabs(r.q_formula - r.q_geometric) / std::max(1e-12, std::fabs(r.q_geometric));
    return r;
}

void omega_upsilon(Complex f, double& omega, Complex& upsilon) {
    if (std::abs(f + 1.0) < 1e-15) throw domain_error("omega_upsilon: singular at f = -1");
    omega = f.imag() / (kPi * std::norm(f + 1.0));
    upsilon = f / ((f + 1.0) * (f + 1.0));
}

TiltParams tilt_params(double xi1, double xi2, double t1, double t2) {
    if (xi1 * xi2 < 0) throw invalid_argument_error("tilt parameters must share a sign");
    if (xi1 == xi2) throw invalid_argument_error("degenerate tilt: xi1 == xi2");
    if (!(t1 < t2)) throw invalid_argument_error("need t1 < t2");
    TiltParams p;
    p.xi1 = xi1;
    p.xi2 = xi2;
    p.t1 = t1;
    p.t2 = t2;
    p.t0 = (xi2 * t1 - xi1 * t2) / (xi2 - xi1);
    p.alpha0 = (xi2 - xi1) / (t2 - t1) + 1.0;
    return p;
}

double LocalQ0Model::q0(double u) const {
    double du = u - jet_.f0;
    return jet_.q0 + jet_.q0p * du + 0.5 * jet_.q0pp * du * du +
           jet_.q0ppp * du * du * du / 6.0;
}
double LocalQ0Model::q0p(double u) const {
    double du = u - jet_.f0;
    return jet_.q0p + jet_.q0pp * du + 0.5 * jet_.q0ppp * du * du;
}
double LocalQ0Model::q0pp(double u) const { return jet_.q0pp + jet_.q0ppp * (u - jet_.f0); }
Complex LocalQ0Model::q0(Complex u) const {
    Complex du = u - jet_.f0;
    return jet_.q0 + jet_.q0p * du + 0.5 * jet_.q0pp * du * du + jet_.q0ppp * du * du * du / 6.0;
}
Complex LocalQ0Model::q0p(Complex u) const {
    Complex du = u - jet_.f0;
    return jet_.q0p + jet_.q0pp * du + 0.5 * jet_.q0ppp * du * du;
}

double LocalQ0Model::q0a(double u, double alpha) const {
    double v = u / alpha;
    return (u + 1.0) / (v + 1.0) * q0(v);
}
double LocalQ0Model::q0a_p(double u, double alpha) const {
    double v = u / alpha;
    double g = q0(v), gp = q0p(v);
    double denom = v + 1.0;
    // d/du [ (u+1)/(v+1) g(v) ] with dv/du = 1/alpha.
    return g / denom + (u + 1.0) * (gp / alpha * denom - g / alpha) / (denom * denom);
}
Complex LocalQ0Model::q0a(Complex u, double alpha) const {
    Complex v = u / alpha;
    return (u + 1.0) / (v + 1.0) * q0(v);
}
Complex LocalQ0Model::q0a_p(Complex u, double alpha) const {
    Complex v = u / alpha;
    Complex g = q0(v), gp = q0p(v);
    Complex denom = v + 1.0;
    return g / denom + (u + 1.0) * (gp / alpha * denom - g / alpha) / (denom * denom);
}

ArcQ0Model::ArcQ0Model(const BoundaryArc& arc, double th_lo, double th_hi, int samples,
                       int degree) {
    // Sample (z, Q0'(f)) with z = f/(f+1); z equals the tangent slope of
    // the arc, so the whole branch maps into the bounded interval (0,1)
    // and the fit stays conditioned through the tangency blowup of f.
    std::vector<double> zs, ws;
    for (int k = 0; k <= samples; ++k) {
        double th = th_lo + (th_hi - th_lo) * k / samples;
        double l;
        try {
            l = arc.slope_xy(th);
        } catch (const error&) {
            continue;
        }
        if (!(l > 0.01 && l < 0.99) || !std::isfinite(l)) continue;
        zs.push_back(l);
        ws.push_back(arc.x(th) - arc.t(th));
        arc_points_.push_back({arc.x(th), arc.t(th)});
    }
    if (zs.size() < static_cast<std::size_t>(degree + 4))
        throw not_found_error("arc too short to reconstruct the boundary function");
    auto [zmin, zmax] = std::minmax_element(zs.begin(), zs.end());
    f_lo_ = *zmin / (1.0 - *zmin);
    f_hi_ = *zmax / (1.0 - *zmax);

    // Least-squares polynomial in 2z - 1.
    const int m = degree + 1;
    std::vector<double> ata(static_cast<std::size_t>(m) * m, 0.0), atb(m, 0.0);
    for (std::size_t s = 0; s < zs.size(); ++s) {
        double z = 2.0 * zs[s] - 1.0;
        std::vector<double> row(static_cast<std::size_t>(m));
        row[0] = 1;
        for (int k = 1; k < m; ++k) row[static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(k) - 1] * z;
        for (int r = 0; r < m; ++r) {
            atb[static_cast<std::size_t>(r)] += row[static_cast<std::size_t>(r)] * ws[s];
            for (int c = 0; c < m; ++c)
                ata[static_cast<std::size_t>(r) * m + c] +=
                    row[static_cast<std::size_t>(r)] * row[static_cast<std::size_t>(c)];
        }
    }
    std::vector<double> a = ata, b = atb;
    for (int c = 0; c < m; ++c) {
        int piv = c;
        for (int r = c + 1; r < m; ++r)
            if (std::fabs(a[static_cast<std::size_t>(r) * m + c]) >
                std::fabs(a[static_cast<std::size_t>(piv) * m + c]))
                piv = r;
        for (int k = 0; k < m; ++k)
            std::swap(a[static_cast<std::size_t>(c) * m + k],
                      a[static_cast<std::size_t>(piv) * m + k]);
        std::swap(b[static_cast<std::size_t>(c)], b[static_cast<std::size_t>(piv)]);
        double dgn = a[static_cast<std::size_t>(c) * m + c];
        if (std::fabs(dgn) < 1e-300) throw not_found_error("degenerate arc fit");
        for (int r = 0; r < m; ++r) {
            if (r == c) continue;
            double fct = a[static_cast<std::size_t>(r) * m + c] / dgn;
            for (int k = 0; k < m; ++k)
                a[static_cast<std::size_t>(r) * m + k] -=
                    fct * a[static_cast<std::size_t>(c) * m + k];
            b[static_cast<std::size_t>(r)] -= fct * b[static_cast<std::size_t>(c)];
        }
    }
    coeffs_.resize(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k)
        coeffs_[static_cast<std::size_t>(k)] =
            b[static_cast<std::size_t>(k)] / a[static_cast<std::size_t>(k) * m + k];

    // Anchor the antiderivative mid-arc through Q0(f) = x (f+1) - t f.
    double th_mid = 0.5 * (th_lo + th_hi);
    double l_mid = arc.slope_xy(th_mid);
    f_anchor_ = l_mid / (1.0 - l_mid);
    q0_anchor_ = arc.x(th_mid) * (f_anchor_ + 1.0) - arc.t(th_mid) * f_anchor_;
    center_ = f_anchor_;
}

double ArcQ0Model::distance_to_arc(double x, double t) const {
    double best = 1e300;
    for (const auto& p : arc_points_)
        best = std::min(best, std::hypot(x - p[0], t - p[1]));
    return best;
}

Complex ArcQ0Model::q0p(Complex f) const {
    Complex z = 2.0 * (f / (f + 1.0)) - 1.0;
    Complex acc(0, 0), p(1, 0);
    for (double c : coeffs_) {
        acc += c * p;
        p *= z;
    }
    return acc;
}

Complex ArcQ0Model::q0(Complex f) const {
    // Gauss-Legendre integral of the fitted derivative along the segment
    // from the anchor.
    static const double gx[8] = {-0.9602898564975363, -0.7966664774136267,
                                 -0.5255324099163290, -0.1834346424956498,
                                 0.1834346424956498,  0.5255324099163290,
                                 0.7966664774136267,  0.9602898564975363};
    static const double gw[8] = {0.1012285362903763, 0.2223810344533745,
                                 0.3137066458778873, 0.3626837833783620,
                                 0.3626837833783620, 0.3137066458778873,
                                 0.2223810344533745, 0.1012285362903763};
    Complex a(f_anchor_, 0);
    Complex h = 0.5 * (f - a);
    Complex mid = 0.5 * (f + a);
    Complex acc(0, 0);
    for (int k = 0; k < 8; ++k) acc += gw[k] * q0p(mid + h * gx[k]);
    return q0_anchor_ + acc * h;
}

Complex ArcQ0Model::q0a(Complex u, double alpha) const {
    Complex v = u / alpha;
    return (u + 1.0) / (v + 1.0) * q0(v);
}

Complex ArcQ0Model::q0a_p(Complex u, double alpha) const {
    Complex v = u / alpha;
    Complex g = q0(v), gp = q0p(v);
    Complex denom = v + 1.0;
    return g / denom + (u + 1.0) * (gp / alpha * denom - g / alpha) / (denom * denom);
}

EndpointShift deformed_endpoint_check(const Q0Jet& jet, double alpha) {
    LocalQ0Model model(jet);
    const double t = jet.t0;
    // Double-root system:  Q0a(F) = (F+1) Q0a'(F) + t,  x = Q0a'(F) + t.
    auto g = [&](double u) { return model.q0a(u, alpha) - (u + 1.0) * model.q0a_p(u, alpha) - t; };
    double u = alpha * jet.f0;  // the undeformed root scales by alpha to first order
    bool converged = false;
    for (int it = 0; it < 50; ++it) {
        double gu = g(u);
        double h = 1e-7 * (1.0 + std::fabs(u));
        double gp = (g(u + h) - g(u - h)) / (2 * h);
        if (std::fabs(gp) < 1e-14) break;
        double step = gu / gp;
        u -= step;
        if (std::fabs(step) < 1e-13 * (1.0 + std::fabs(u))) {
            converged = true;
            break;
        }
    }
    if (!converged && std::fabs(g(u)) > 1e-9)
        throw convergence_error("deformed double-root iteration diverged");
    double x_def = model.q0a_p(u, alpha) + t;
    EndpointShift out;
    out.solved = x_def - jet.x0;
    double upsilon = jet.f0 / ((jet.f0 + 1.0) * (jet.f0 + 1.0));
    out.predicted = t * (alpha - 1.0) * upsilon;
    out.residual = std::fabs(out.solved - out.predicted);
    return out;
}

namespace {

// Lower-half-plane root of  Q0a(F;alpha) = x (F+1) - t F  on the model,
// seeded by Newton from `start`.
Complex model_root(const ArcQ0Model& model, double x, double t, double alpha, Complex start) {
    Complex u = start;
    bool converged = false;
    for (int it = 0; it < 80; ++it) {
        Complex d = model.q0a_p(u, alpha) - x + t;
        if (std::abs(d) < 1e-14) break;
        Complex step = (model.q0a(u, alpha) - x * (u + 1.0) + t * u) / d;
        u -= step;
        if (std::abs(step) < 1e-13 * (1.0 + std::abs(u))) {
            converged = true;
            break;
        }
    }
    if (!converged &&
        std::abs(model.q0a(u, alpha) - x * (u + 1.0) + t * u) > 1e-8 * (1.0 + std::abs(x)))
        throw convergence_error("interior deformation iteration diverged");
    // The conjugate root solves the same real-coefficient relation.
    if (u.imag() > 0) u = std::conj(u);
    return u;
}

}  // namespace

InteriorLogCheck interior_log_perturbation_check(const ArcQ0Model& model, double x0, double x,
                                                 double t, double alpha) {
    // Seed from the square-root profile at the boundary point.
    Complex f0(model.anchor_f(), 0);
    Complex seed = f0 + Complex(0, -0.3) * std::sqrt(std::fabs(x0 - x) + 1e-12);
    Complex f1 = model_root(model, x, t, 1.0, seed);
    Complex fa = model_root(model, x, t, alpha, alpha * f1);
    // d_x F from the reconstructed function.
    Complex fx = (f1 + 1.0) / (model.q0p(f1) - x + t);

    InteriorLogCheck out;
    out.lhs = std::log(fa) - std::log(Complex(alpha, 0)) - std::log(f1);
    out.predicted = t * (1.0 - alpha) * fx / ((f1 + 1.0) * (f1 + 1.0));
    out.rel_residual =
        std::abs(out.lhs - out.predicted) / std::max(1e-300, std::abs(out.predicted));
    out.d = std::fabs(x - x0);
    return out;
}

DerivativeIdentityStats derivative_identity_check(const ComplexSlopeField& field,
                                                  const ArcQ0Model& model,
                                                  int min_cells_from_edge) {
    const double m = field.mesh;
    std::vector<double> rdx, rdt, rratio;
    for (const Vertex& v : guarded_nodes(field, min_cells_from_edge)) {
        double x = v.x * m, t = v.y * m;
        Complex f = field.at(v.x, v.y);
        // Keep to the fitted branch and the reliable continuation zone of
        // the fit: z = f/(f+1) near the fitted real interval.
        if (model.distance_to_arc(x, t) > 0.30) continue;
        Complex z = f / (f + 1.0);
        if (z.real() < 0.08 || z.real() > 0.92 || z.imag() < -0.62) continue;
        Complex fx = (field.at(v.x + 1, v.y) - field.at(v.x - 1, v.y)) / (2 * m);
        Complex ft = (field.at(v.x, v.y + 1) - field.at(v.x, v.y - 1)) / (2 * m);
        Complex denom = model.q0p(f) - x + t;
        if (std::abs(denom) < 1e-12) continue;
        Complex fx_pred = (f + 1.0) / denom;
        Complex ft_pred = -f / denom;
        rdx.push_back(std::abs(fx - fx_pred) / std::max(1e-300, std::abs(fx_pred)));
        rdt.push_back(std::abs(ft - ft_pred) / std::max(1e-300, std::abs(ft_pred)));
        if (std::abs(fx) > 1e-12)
            rratio.push_back(std::abs(ft / fx + f / (f + 1.0)));
    }
    DerivativeIdentityStats out;
    out.nodes = rdx.size();
    out.median_dx = median_of(rdx);
    out.median_dt = median_of(rdt);
    out.median_ratio = median_of(rratio);
    return out;
}

}  // namespace arctic
