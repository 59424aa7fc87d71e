#include "arctic/limitshape.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>

#include "arctic/errors.hpp"

namespace arctic {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Integrand of the Lobachevsky function.
inline double log2sin(double z) { return std::log(std::fabs(2.0 * std::sin(z))); }

// Adaptive Simpson on a smooth stretch.
double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
    if (a == b) return 0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_rec(f, a, b, fa, fm, fb, whole, tol, 48);
}

// -int_0^u log(2 sin z) dz for u in [0, pi/2]; the singular part at zero
// is integrated in closed form, the analytic remainder numerically.
double lobachevsky_half(double u) {
    if (u <= 0) return 0;
    const double a = std::min(u, 0.25);
    // log(2 sin z) = log(2z) + log(sin(z)/z); the first part integrates to
    // a (log(2a) - 1).
    double head = -(a * (std::log(2.0 * a) - 1.0));
    double smooth = -adaptive_simpson(
        [](double z) { return z == 0 ? 0.0 : std::log(std::sin(z) / z); }, 0, a, 1e-13);
    double tail = 0;
    if (u > a)
        tail = -adaptive_simpson([](double z) { return log2sin(z); }, a, u, 1e-13);
    return head + smooth + tail;
}

}  // namespace

double lobachevsky(double x) {
    if (x < 0) throw invalid_argument_error("lobachevsky: negative argument");
    // Odd and pi-periodic: reduce to [0, pi/2].
    double r = std::fmod(x, kPi);
    double sign = 1.0;
    if (r > kPi / 2) {
        r = kPi - r;
        sign = -1.0;
    }
    return sign * lobachevsky_half(r);
}

double surface_tension(Slope sl) {
    const double eps = 1e-12;
    if (sl.s < -eps || sl.t > eps || sl.s - sl.t < -eps || sl.s - sl.t > 1 + eps)
        throw domain_error("surface_tension: slope outside the triangle");
    double p1 = std::clamp(sl.s, 0.0, 1.0);
    double p2 = std::clamp(-sl.t, 0.0, 1.0);
    double p3 = std::clamp(1.0 - sl.s + sl.t, 0.0, 1.0);
    return (lobachevsky(kPi * p1) + lobachevsky(kPi * p2) + lobachevsky(kPi * p3)) / kPi;
}

void surface_tension_grad(Slope sl, double& ds, double& dt) {
    double p1 = kPi * sl.s, p2 = -kPi * sl.t, p3 = kPi * (1.0 - sl.s + sl.t);
    // d sigma / ds = log(sin p3 / sin p1), d sigma / dt = log(sin p2 / sin p3).
    const double floor_v = 1e-300;
    double s1 = std::max(std::sin(p1), floor_v);
    double s2 = std::max(std::sin(p2), floor_v);
    double s3 = std::max(std::sin(p3), floor_v);
    ds = std::log(s3 / s1);
    dt = std::log(s2 / s3);
}

void surface_tension_grad_hess(Slope sl, double& ds, double& dt, double& dss, double& dst,
                               double& dtt) {
    double p1 = kPi * sl.s, p2 = -kPi * sl.t, p3 = kPi * (1.0 - sl.s + sl.t);
    const double floor_v = 1e-300;
    double s1 = std::max(std::sin(p1), floor_v);
    double s2 = std::max(std::sin(p2), floor_v);
    double s3 = std::max(std::sin(p3), floor_v);
    ds = std::log(s3 / s1);
    dt = std::log(s2 / s3);
    double c1 = std::cos(p1) / s1, c2 = std::cos(p2) / s2, c3 = std::cos(p3) / s3;
    dss = -kPi * (c1 + c3);
    dst = kPi * c3;
    dtt = -kPi * (c2 + c3);
}

double Conic::dx_dy(double x, double y) const {
    // F_x dx + F_y dy = 0 along the curve.
    double fx = 2 * a * x + b * y + d;
    double fy = b * x + 2 * c * y + e;
    if (std::fabs(fx) < 1e-14 * (std::fabs(fy) + 1))
        throw tangency_error("conic tangent is horizontal");
    return -fy / fx;
}

std::vector<double> Conic::solve_x(double y) const {
    // a x^2 + (b y + d) x + (c y^2 + e y + f) = 0.
    double qa = a, qb = b * y + d, qc = c * y * y + e * y + f;
    std::vector<double> out;
    if (std::fabs(qa) < 1e-15) {
        if (std::fabs(qb) > 1e-15) out.push_back(-qc / qb);
        return out;
    }
    double disc = qb * qb - 4 * qa * qc;
    if (disc < 0) return out;
    double r = std::sqrt(disc);
    double x1 = (-qb - r) / (2 * qa), x2 = (-qb + r) / (2 * qa);
    out.push_back(std::min(x1, x2));
    out.push_back(std::max(x1, x2));
    return out;
}

namespace {

// Solves the 6x6 homogeneous system M q = 0 for the dual conic by Gaussian
// elimination with partial pivoting, fixing the freest coordinate to 1.
std::array<double, 6> nullspace6(std::array<std::array<double, 6>, 6> m) {
    std::array<int, 6> perm{0, 1, 2, 3, 4, 5};
    int rank = 0;
    for (int col = 0; col < 6 && rank < 6; ++col) {
        int piv = -1;
        double best = 1e-11;
        for (int r = rank; r < 6; ++r)
            if (std::fabs(m[r][col]) > best) {
                best = std::fabs(m[r][col]);
                piv = r;
            }
        if (piv < 0) continue;
        std::swap(m[rank], m[piv]);
        for (int r = 0; r < 6; ++r) {
            if (r == rank) continue;
            double f = m[r][col] / m[rank][col];
            for (int c2 = 0; c2 < 6; ++c2) m[r][c2] -= f * m[rank][c2];
        }
        perm[rank] = col;
        ++rank;
    }
    if (rank >= 6) throw domain_error("tangency system has no nullspace");
    // Identify a free column.
    std::array<bool, 6> pivot_col{};
    for (int r = 0; r < rank; ++r) pivot_col[perm[r]] = true;
    int free_col = -1;
    for (int c = 0; c < 6; ++c)
        if (!pivot_col[c]) free_col = c;
    std::array<double, 6> q{};
    q[free_col] = 1.0;
    for (int r = rank - 1; r >= 0; --r) {
        double s = m[r][free_col];
        q[perm[r]] = -s / m[r][perm[r]];
    }
    return q;
}

}  // namespace

Conic hexagon_inscribed_ellipse(double a, double b, double c) {
    if (a <= 0 || b <= 0 || c <= 0)
        throw invalid_argument_error("hexagon sides must be positive");
    // Side lines u x + v y + w = 0 of the hexagon
    // (0,0),(a,0),(a+c,c),(a+c,b+c),(c,b+c),(0,b).
    struct Line {
        double u, v, w;
    };
    std::vector<Line> lines = {
        {0, 1, 0},            // bottom y = 0
        {1, -1, -(a - 0)},    // x - y = a
        {1, 0, -(a + c)},     // x = a + c
        {0, 1, -(b + c)},     // y = b + c
        {1, -1, (b - 0)},     // x - y = -b
        {1, 0, 0},            // x = 0
    };
    // Tangency: l^T Q l = 0 with Q the dual conic.
    std::array<std::array<double, 6>, 6> m{};
    for (int i = 0; i < 6; ++i) {
        double u = lines[i].u, v = lines[i].v, w = lines[i].w;
        m[i] = {u * u, 2 * u * v, v * v, 2 * u * w, 2 * v * w, w * w};
    }
    auto q = nullspace6(m);
    // Q = [[q0,q1,q3],[q1,q2,q4],[q3,q4,q5]]; conic = adj(Q).
    double q00 = q[0], q01 = q[1], q11 = q[2], q02 = q[3], q12 = q[4], q22 = q[5];
    double a00 = q11 * q22 - q12 * q12;
    double a01 = q02 * q12 - q01 * q22;
    double a11 = q00 * q22 - q02 * q02;
    double a02 = q01 * q12 - q11 * q02;
    double a12 = q01 * q02 - q00 * q12;
    double a22 = q00 * q11 - q01 * q01;
    Conic conic{a00, 2 * a01, a11, 2 * a02, 2 * a12, a22};
    // Normalize so the conic is positive outside (value at a hexagon
    // vertex positive) and the leading coefficient is one.
    double at_vertex = conic.eval(0, 0);
    double scale = conic.a != 0 ? conic.a : 1.0;
    if (at_vertex / scale < 0) scale = -scale;
    conic.a /= scale;
    conic.b /= scale;
    conic.c /= scale;
    conic.d /= scale;
    conic.e /= scale;
    conic.f /= scale;
    return conic;
}

CurvatureParams conic_curvature(const Conic& conic, double x0, double y0) {
    double fx = 2 * conic.a * x0 + conic.b * y0 + conic.d;
    double fy = conic.b * x0 + 2 * conic.c * y0 + conic.e;
    double grad = std::hypot(fx, fy);
    if (std::fabs(fx) < 1e-9 * grad) throw tangency_error("horizontal tangent at base point");
    double l = -fy / fx;
    if (std::fabs(l) < 1e-9 || std::fabs(l - 1.0) < 1e-9 || std::fabs(l) > 1e9)
        throw tangency_error("tangent slope in {0,1,inf} at base point");
    // x''(y) from differentiating F(x(y), y) = 0 twice.
    double fxx = 2 * conic.a, fxy = conic.b, fyy = 2 * conic.c;
    double xpp = -(fxx * l * l + 2 * fxy * l + fyy) / fx;
    return {l, 0.5 * xpp};
}

CurvatureParams polyline_curvature(const std::vector<std::array<double, 2>>& polyline,
                                   double x0, double y0, double window) {
    // Weighted least squares of x - x0 on (y-y0), (y-y0)^2.
    double s11 = 0, s12 = 0, s22 = 0, b1 = 0, b2 = 0;
    std::size_t used = 0;
    for (const auto& p : polyline) {
        double dy = p[1] - y0;
        if (std::fabs(dy) > window) continue;
        double dx = p[0] - x0;
        if (std::fabs(dx) > 2 * window) continue;  // other branch of the curve
        double w = 1.0 - std::fabs(dy) / (window * 1.0000001);
        s11 += w * dy * dy;
        s12 += w * dy * dy * dy;
        s22 += w * dy * dy * dy * dy;
        b1 += w * dy * dx;
        b2 += w * dy * dy * dx;
        ++used;
    }
    if (used < 5) throw not_found_error("too few polyline points near the base point");
    double det = s11 * s22 - s12 * s12;
    if (std::fabs(det) < 1e-30) throw not_found_error("degenerate curvature fit");
    double l = (b1 * s22 - b2 * s12) / det;
    double q = (s11 * b2 - s12 * b1) / det;
    if (std::fabs(l) < 1e-9 || std::fabs(l - 1.0) < 1e-9 || std::fabs(l) > 1e9)
        throw tangency_error("tangent slope in {0,1,inf} at base point");
    return {l, q};
}

ContinuumHeight::ContinuumHeight(DomainPtr grid, double mesh, std::vector<double> values)
    : grid_(std::move(grid)), mesh_(mesh), values_(std::move(values)) {
    if (values_.size() != grid_->box_size())
        throw invalid_argument_error("continuum height value size mismatch");
}

bool ContinuumHeight::cell_in_domain(int i, int j) const {
    return grid_->has_up_face(i, j) || grid_->has_down_face(i, j);
}

double ContinuumHeight::value(double x, double y) const {
    const LatticeDomain& d = *grid_;
    double gx = x / mesh_, gy = y / mesh_;
    int i = static_cast<int>(std::floor(gx));
    int j = static_cast<int>(std::floor(gy));
    i = std::clamp(i, d.x0(), d.x1() - 1);
    j = std::clamp(j, d.y0(), d.y1() - 1);
    double fx = gx - i, fy = gy - j;
    // The square cell splits along its main diagonal into the two lattice
    // triangles; interpolate linearly on the one containing the point.
    auto val = [&](int ii, int jj) {
        if (d.contains(ii, jj)) return values_[d.index(ii, jj)];
        // Clamp to the nearest domain value for points on the boundary
        // edge of a half-cell.
        return values_[d.index(std::clamp(ii, d.x0(), d.x1()), std::clamp(jj, d.y0(), d.y1()))];
    };
    double h00 = val(i, j), h11 = val(i + 1, j + 1);
    if (fx >= fy) {
        double h10 = val(i + 1, j);
        return h00 + (h10 - h00) * fx + (h11 - h10) * fy;
    }
    double h01 = val(i, j + 1);
    return h00 + (h11 - h01) * fx + (h01 - h00) * fy;
}

HeightGradient ContinuumHeight::cell_gradient(int i, int j) const {
    const LatticeDomain& d = *grid_;
    double sx = 0, sy = 0;
    int cnt = 0;
    if (d.has_up_face(i, j)) {
        // corners (i,j),(i+1,j),(i+1,j+1)
        sx += (at_node(i + 1, j) - at_node(i, j)) / mesh_;
        sy += (at_node(i + 1, j + 1) - at_node(i + 1, j)) / mesh_;
        ++cnt;
    }
    if (d.has_down_face(i, j)) {
        // corners (i,j),(i,j+1),(i+1,j+1)
        sx += (at_node(i + 1, j + 1) - at_node(i, j + 1)) / mesh_;
        sy += (at_node(i, j + 1) - at_node(i, j)) / mesh_;
        ++cnt;
    }
    if (cnt == 0) throw not_found_error("cell outside the domain");
    return {sx / cnt, sy / cnt};
}

HeightGradient ContinuumHeight::node_gradient(int i, int j) const {
    const LatticeDomain& d = *grid_;
    if (!d.contains(i - 1, j) || !d.contains(i + 1, j) || !d.contains(i, j - 1) ||
        !d.contains(i, j + 1))
        throw not_found_error("node gradient needs all four axis neighbors");
    return {(at_node(i + 1, j) - at_node(i - 1, j)) / (2 * mesh_),
            (at_node(i, j + 1) - at_node(i, j - 1)) / (2 * mesh_)};
}

double ContinuumHeight::cell_margin(int i, int j) const {
    const LatticeDomain& d = *grid_;
    double margin = 1e300;
    bool any = false;
    if (d.has_up_face(i, j)) {
        double sr = (at_node(i + 1, j) - at_node(i, j)) / mesh_;
        double tr = (at_node(i + 1, j + 1) - at_node(i + 1, j)) / mesh_;
        margin = std::min(margin, slope_margin(slope_from_gradient({sr, tr})));
        any = true;
    }
    if (d.has_down_face(i, j)) {
        double sr = (at_node(i + 1, j + 1) - at_node(i, j + 1)) / mesh_;
        double tr = (at_node(i, j + 1) - at_node(i, j)) / mesh_;
        margin = std::min(margin, slope_margin(slope_from_gradient({sr, tr})));
        any = true;
    }
    return any ? margin : -1.0;
}

namespace {

// Incident-triangle description for the coordinate update at one node.
// Each triangle contributes sigma(s', t') with
//   s' = (H_C - H_A)/m (diagonal),  t' = vertical difference / m,
// and the node enters as one of the corners.
struct Solver {
    const LatticeDomain& d;
    double m;
    std::vector<double>& h;
    double clamp;

    // Returns d(total sigma)/dh at the node value x, along with feasible
    // bounds [lo, hi] from the six incident increments.
    // Triangles incident to node (i,j):
    //   up(i,j): A=(i,j) B=(i+1,j) C=(i+1,j+1)     s'=(C-A)/m t'=(C-B)/m
    //   dn(i,j): A=(i,j) B=(i,j+1) C=(i+1,j+1)     s'=(C-A)/m t'=(B-A)/m
    //   up(i-1,j):   node is B                      A=(i-1,j)   C=(i,j+1)
    //   dn(i,j-1):   node is B                      A=(i,j-1)   C=(i+1,j)
    //   up(i-1,j-1): node is C                      A=(i-1,j-1) B=(i,j-1)
    //   dn(i-1,j-1): node is C                      A=(i-1,j-1) B=(i-1,j)
    double deriv(int i, int j, double x) const {
        double g, unused;
        deriv2(i, j, x, g, unused);
        return g;
    }

    // First and second derivative of the incident-sigma sum in the node
    // value.  Each triangle contributes through the coefficients
    // (a_T, b_T) = d(s', t')/dx, so g'' = a^2 s_ss + 2ab s_st + b^2 s_tt.
    void deriv2(int i, int j, double x, double& g, double& gp) const {
        g = 0;
        gp = 0;
        double ds, dt, dss, dst, dtt;
        const double inv = 1.0 / m;
        auto accum = [&](double sp, double tp, double a, double b) {
            surface_tension_grad_hess({sp, tp}, ds, dt, dss, dst, dtt);
            g += a * ds + b * dt;
            gp += (a * a * dss + 2 * a * b * dst + b * b * dtt) * inv;
        };
        if (d.has_up_face(i, j)) {
            double b = h[d.index(i + 1, j)], c = h[d.index(i + 1, j + 1)];
            accum((c - x) * inv, (c - b) * inv, -1, 0);
        }
        if (d.has_down_face(i, j)) {
            double b = h[d.index(i, j + 1)], c = h[d.index(i + 1, j + 1)];
            accum((c - x) * inv, (b - x) * inv, -1, -1);
        }
        if (d.has_up_face(i - 1, j)) {
            double a = h[d.index(i - 1, j)], c = h[d.index(i, j + 1)];
            accum((c - a) * inv, (c - x) * inv, 0, -1);
        }
        if (d.has_down_face(i, j - 1)) {
            double a = h[d.index(i, j - 1)], c = h[d.index(i + 1, j)];
            accum((c - a) * inv, (x - a) * inv, 0, 1);
        }
        if (d.has_up_face(i - 1, j - 1)) {
            double a = h[d.index(i - 1, j - 1)], b = h[d.index(i, j - 1)];
            accum((x - a) * inv, (x - b) * inv, 1, 1);
        }
        if (d.has_down_face(i - 1, j - 1)) {
            double a = h[d.index(i - 1, j - 1)], b = h[d.index(i - 1, j)];
            accum((x - a) * inv, (b - a) * inv, 1, 0);
        }
    }

    void bounds(int i, int j, double& lo, double& hi) const {
        lo = -1e300;
        hi = 1e300;
        auto meet = [&](bool cond, double l, double u) {
            if (!cond) return;
            lo = std::max(lo, l);
            hi = std::min(hi, u);
        };
        meet(d.contains(i - 1, j), h[d.index(i - 1, j)], h[d.index(i - 1, j)] + m);
        meet(d.contains(i + 1, j), h[d.index(i + 1, j)] - m, h[d.index(i + 1, j)]);
        meet(d.contains(i, j + 1), h[d.index(i, j + 1)], h[d.index(i, j + 1)] + m);
        meet(d.contains(i, j - 1), h[d.index(i, j - 1)] - m, h[d.index(i, j - 1)]);
        meet(d.contains(i + 1, j + 1), h[d.index(i + 1, j + 1)] - m, h[d.index(i + 1, j + 1)]);
        meet(d.contains(i - 1, j - 1), h[d.index(i - 1, j - 1)], h[d.index(i - 1, j - 1)] + m);
    }

    // The objective restricted to this coordinate is strictly concave with
    // derivative +inf / -inf at the cone walls, so the maximizer is the
    // unique interior root of `deriv`.  Safeguarded Newton: the bracket
    // shrinks on every step, the Newton iterate is used when it stays
    // inside.
    double update(int i, int j, double x0, bool& clamped) const {
        double lo, hi;
        bounds(i, j, lo, hi);
        double pad = clamp * m;
        double a = lo + pad, b = hi - pad;
        if (!(a < b)) {
            clamped = true;
            return 0.5 * (lo + hi);
        }
        double fa = deriv(i, j, a);
        if (fa <= 0) {
            clamped = true;
            return a;
        }
        double fb = deriv(i, j, b);
        if (fb >= 0) {
            clamped = true;
            return b;
        }
        double x = std::clamp(x0, a + 0.25 * (b - a) * 0, b);
        if (!(x > a && x < b)) x = 0.5 * (a + b);
        for (int it = 0; it < 24; ++it) {
            double g, gp;
            deriv2(i, j, x, g, gp);
            if (g > 0)
                a = x;
            else
                b = x;
            double nx = gp < 0 ? x - g / gp : 0.5 * (a + b);
            if (!(nx > a && nx < b)) nx = 0.5 * (a + b);
            if (std::fabs(nx - x) < 1e-13) return nx;
            x = nx;
            if (b - a < 1e-13) break;
        }
        return x;
    }
};

}  // namespace

ContinuumHeight solve_limit_shape(const PolygonSpec& spec, double mesh, const SolveOptions& opts,
                                  SolveReport* report) {
    if (!(mesh > 0) || std::fabs(1.0 / mesh - std::round(1.0 / mesh)) > 1e-9)
        throw invalid_argument_error("mesh must be a reciprocal integer");
    long long n_mesh = static_cast<long long>(std::round(1.0 / mesh));

    // Coarse-to-fine initialization halves the sweep count at the finest
    // level; levels that do not divide evenly are skipped.
    std::vector<long long> levels;
    if (opts.coarse_init)
        for (long long f = 8; f >= 2; f /= 2)
            if (n_mesh % f == 0 && n_mesh / f >= 4) levels.push_back(n_mesh / f);
    levels.push_back(n_mesh);

    DomainPtr grid;
    std::vector<double> h;
    DomainPtr prev_grid;
    std::vector<double> prev_h;
    double prev_mesh = 0;
    SolveReport rep;

    for (std::size_t li = 0; li < levels.size(); ++li) {
        long long nm = levels[li];
        double m = 1.0 / static_cast<double>(nm);
        grid = build_domain(spec, nm);
        const LatticeDomain& d = *grid;
        BoundaryHeightFn bh = boundary_height(grid);
        auto [lo_f, hi_f] = extremal_heights(grid, bh);
        h.assign(d.box_size(), 0);
        for (const Vertex& v : d.vertices()) {
            std::size_t bi = d.index(v.x, v.y);
            if (d.is_boundary(v.x, v.y)) {
                h[bi] = m * bh.at(v.x, v.y);
            } else if (prev_grid) {
                ContinuumHeight coarse(prev_grid, prev_mesh, prev_h);
                double val = coarse.value(v.x * m, v.y * m);
                // Project into the feasible cone window.
                h[bi] = std::clamp(val, m * lo_f.at(v.x, v.y), m * hi_f.at(v.x, v.y));
            } else {
                h[bi] = 0.5 * m * (lo_f.at(v.x, v.y) + hi_f.at(v.x, v.y));
            }
        }
        // Re-projection sweep: coarse interpolation can violate the cone
        // by O(mesh); pull each node into its local window.
        Solver solver{d, m, h, opts.clamp};
        for (int pass = 0; pass < 4; ++pass) {
            for (const Vertex& v : d.interior_vertices()) {
                double lo, hi;
                solver.bounds(v.x, v.y, lo, hi);
                double& x = h[d.index(v.x, v.y)];
                if (x < lo) x = lo;
                if (x > hi) x = hi;
            }
        }

        const bool finest = li + 1 == levels.size();
        int sweep_budget = finest ? opts.max_sweeps : std::max(200, opts.max_sweeps / 8);
        rep = SolveReport{};
        // Accelerated phase with over-relaxation, then a plain finishing
        // phase whose exact per-vertex maximization is monotone in the
        // objective.
        const double pad = opts.clamp * m;
        auto sweep_once = [&](double omega) {
            double max_move = 0;
            bool clamped = false;
            for (const Vertex& v : d.interior_vertices()) {
                std::size_t bi = d.index(v.x, v.y);
                double cur = h[bi];
                double next = solver.update(v.x, v.y, cur, clamped);
                if (omega != 1.0) {
                    double lo, hi;
                    solver.bounds(v.x, v.y, lo, hi);
                    next = std::clamp(cur + omega * (next - cur), lo + pad, hi - pad);
                    if (!(next >= lo && next <= hi)) next = std::clamp(next, lo, hi);
                }
                h[bi] = next;
                max_move = std::max(max_move, std::fabs(next - cur));
            }
            rep.clamped = rep.clamped || clamped;
            return max_move;
        };
        // Over-relaxed sweeps do the bulk of the work; once they stall or
        // converge, plain monotone sweeps finish.  Both phases stop early
        // when the per-sweep movement plateaus: the lingering oscillation
        // is local flapping at the clamp boundary, while the smooth error
        // (the part that matters for derived fields) keeps decaying.
        bool accelerated = opts.over_relax > 1.0;
        double best_move = 1e300;
        int since_improvement = 0;
        for (int sweep = 0; sweep < sweep_budget; ++sweep) {
            double max_move = sweep_once(accelerated ? opts.over_relax : 1.0);
            rep.sweeps = sweep + 1;
            rep.max_move = max_move;
            if (opts.progress && finest) opts.progress(sweep, max_move);
            if (max_move < 0.7 * best_move) {
                best_move = max_move;
                since_improvement = 0;
            } else {
                ++since_improvement;
            }
            bool stalled = since_improvement >= 60;
            if (accelerated && (max_move < 10 * opts.move_tol || stalled)) {
                accelerated = false;
                best_move = max_move;
                since_improvement = 0;
                continue;
            }
            if (!accelerated && (max_move < opts.move_tol || stalled)) break;
        }
        prev_grid = grid;
        prev_h = h;
        prev_mesh = m;
    }

    ContinuumHeight out(grid, 1.0 / static_cast<double>(levels.back()), std::move(h));
    if (report) {
        // Stationarity over nodes whose incident cells are all liquid.
        const LatticeDomain& d = *grid;
        Solver solver{d, out.mesh(), out.raw(), opts.clamp};
        double st = 0;
        for (const Vertex& v : d.interior_vertices()) {
            bool liquid = true;
            for (int dj = -1; dj <= 0 && liquid; ++dj)
                for (int di = -1; di <= 0 && liquid; ++di)
                    if (out.cell_margin(v.x + di, v.y + dj) < 1e-3) liquid = false;
            if (!liquid) continue;
            st = std::max(st, std::fabs(solver.deriv(v.x, v.y, out.at_node(v.x, v.y))));
        }
        rep.stationarity = st;
        rep.entropy = entropy_functional(out);
        *report = rep;
    }
    return out;
}

double entropy_functional(const ContinuumHeight& hc) {
    const LatticeDomain& d = *hc.grid();
    const double m = hc.mesh();
    const double area = 0.5 * m * m;
    double total = 0;
    for (int j = d.y0(); j < d.y1(); ++j) {
        for (int i = d.x0(); i < d.x1(); ++i) {
            if (d.has_up_face(i, j)) {
                double sr = (hc.at_node(i + 1, j) - hc.at_node(i, j)) / m;
                double tr = (hc.at_node(i + 1, j + 1) - hc.at_node(i + 1, j)) / m;
                Slope sl = slope_from_gradient({sr, tr});
                sl.s = std::clamp(sl.s, 0.0, 1.0);
                sl.t = std::clamp(sl.t, sl.s - 1.0, 0.0);
                total += area * surface_tension(sl);
            }
            if (d.has_down_face(i, j)) {
                double sr = (hc.at_node(i + 1, j + 1) - hc.at_node(i, j + 1)) / m;
                double tr = (hc.at_node(i, j + 1) - hc.at_node(i, j)) / m;
                Slope sl = slope_from_gradient({sr, tr});
                sl.s = std::clamp(sl.s, 0.0, 1.0);
                sl.t = std::clamp(sl.t, sl.s - 1.0, 0.0);
                total += area * surface_tension(sl);
            }
        }
    }
    return total;
}

LiquidRegion extract_liquid_region(const ContinuumHeight& hc, double tol) {
    const LatticeDomain& d = *hc.grid();
    LiquidRegion out;
    out.tol = tol;
    out.cell_mask.assign(d.box_size(), 0);
    for (int j = d.y0(); j < d.y1(); ++j)
        for (int i = d.x0(); i < d.x1(); ++i)
            if (hc.cell_in_domain(i, j) && hc.cell_margin(i, j) > tol)
                out.cell_mask[d.index(i, j)] = 1;

    // Node field for the contour: smallest incident-cell margin.
    auto node_margin = [&](int i, int j) {
        double v = 1e300;
        bool any = false;
        for (int dj = -1; dj <= 0; ++dj)
            for (int di = -1; di <= 0; ++di)
                if (hc.cell_in_domain(i + di, j + dj)) {
                    v = std::min(v, hc.cell_margin(i + di, j + dj));
                    any = true;
                }
        return any ? v : -tol;
    };
    // Marching squares on the node field at level tol, on the physical
    // scale.
    const double m = hc.mesh();
    std::vector<std::array<double, 2>> segments;  // pairs of points
    auto interp = [&](double xa, double ya, double va, double xb, double yb, double vb) {
        double f = (tol - va) / (vb - va);
        f = std::clamp(f, 0.0, 1.0);
        return std::array<double, 2>{xa + f * (xb - xa), ya + f * (yb - ya)};
    };
    for (int j = d.y0(); j < d.y1(); ++j) {
        for (int i = d.x0(); i < d.x1(); ++i) {
            if (!d.contains(i, j) || !d.contains(i + 1, j) || !d.contains(i, j + 1) ||
                !d.contains(i + 1, j + 1))
                continue;
            double v00 = node_margin(i, j), v10 = node_margin(i + 1, j);
            double v01 = node_margin(i, j + 1), v11 = node_margin(i + 1, j + 1);
            int code = (v00 > tol) | ((v10 > tol) << 1) | ((v11 > tol) << 2) | ((v01 > tol) << 3);
            if (code == 0 || code == 15) continue;
            double x = i * m, y = j * m;
            std::array<double, 2> e0 = interp(x, y, v00, x + m, y, v10);          // bottom
            std::array<double, 2> e1 = interp(x + m, y, v10, x + m, y + m, v11);  // right
            std::array<double, 2> e2 = interp(x, y + m, v01, x + m, y + m, v11);  // top
            std::array<double, 2> e3 = interp(x, y, v00, x, y + m, v01);          // left
            auto add = [&](std::array<double, 2> p, std::array<double, 2> q) {
                segments.push_back(p);
                segments.push_back(q);
            };
            switch (code) {
                case 1: add(e3, e0); break;
                case 2: add(e0, e1); break;
                case 3: add(e3, e1); break;
                case 4: add(e1, e2); break;
                case 5: add(e3, e0); add(e1, e2); break;
                case 6: add(e0, e2); break;
                case 7: add(e3, e2); break;
                case 8: add(e2, e3); break;
                case 9: add(e2, e0); break;
                case 10: add(e0, e1); add(e2, e3); break;
                case 11: add(e2, e1); break;
                case 12: add(e1, e3); break;
                case 13: add(e1, e0); break;
                case 14: add(e0, e3); break;
                default: break;
            }
        }
    }
    // Chain the (unoriented) segments into the longest polyline.
    auto key = [m](const std::array<double, 2>& p) {
        return std::pair<long long, long long>(
            static_cast<long long>(std::llround(p[0] / m * 512.0)),
            static_cast<long long>(std::llround(p[1] / m * 512.0)));
    };
    std::multimap<std::pair<long long, long long>, std::size_t> by_end;
    const std::size_t nseg = segments.size() / 2;
    std::vector<bool> used(nseg, false);
    for (std::size_t s = 0; s < nseg; ++s) {
        by_end.emplace(key(segments[2 * s]), s);
        by_end.emplace(key(segments[2 * s + 1]), s);
    }
    std::vector<std::array<double, 2>> best;
    for (std::size_t s0 = 0; s0 < nseg; ++s0) {
        if (used[s0]) continue;
        std::vector<std::array<double, 2>> chain{segments[2 * s0], segments[2 * s0 + 1]};
        used[s0] = true;
        for (int dir = 0; dir < 2; ++dir) {
            for (;;) {
                auto range = by_end.equal_range(key(chain.back()));
                std::size_t next = static_cast<std::size_t>(-1);
                for (auto it = range.first; it != range.second; ++it)
                    if (!used[it->second]) {
                        next = it->second;
                        break;
                    }
                if (next == static_cast<std::size_t>(-1)) break;
                used[next] = true;
                // Append whichever endpoint extends the chain.
                auto a = segments[2 * next], b = segments[2 * next + 1];
                chain.push_back(key(a) == key(chain.back()) ? b : a);
            }
            std::reverse(chain.begin(), chain.end());
        }
        if (chain.size() > best.size()) best = std::move(chain);
    }
    out.arctic_polyline = std::move(best);
    return out;
}

double distance_to_polyline(const std::vector<std::array<double, 2>>& poly, double x, double y) {
    double best = 1e300;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
        double ax = poly[i][0], ay = poly[i][1];
        double bx = poly[i + 1][0], by = poly[i + 1][1];
        double vx = bx - ax, vy = by - ay;
        double len2 = vx * vx + vy * vy;
        double u = len2 > 0 ? std::clamp(((x - ax) * vx + (y - ay) * vy) / len2, 0.0, 1.0) : 0.0;
        double dx = x - (ax + u * vx), dy = y - (ay + u * vy);
        best = std::min(best, dx * dx + dy * dy);
    }
    return std::sqrt(best);
}

namespace {

// Closed liquid slice [xl, xr] of the row, from the liquid cell mask.
bool liquid_slice(const ContinuumHeight& hc, const LiquidRegion& liq, double t, double& xl,
                  double& xr) {
    const LatticeDomain& d = *hc.grid();
    const double m = hc.mesh();
    int j = std::clamp(static_cast<int>(std::floor(t / m)), d.y0(), d.y1() - 1);
    int j2 = std::clamp(static_cast<int>(std::ceil(t / m)) - 1, d.y0(), d.y1() - 1);
    bool any = false;
    double lo = 1e300, hi = -1e300;
    for (int jj : {j, j2}) {
        for (int i = d.x0(); i < d.x1(); ++i) {
            if (!liq.cell_mask[d.index(i, jj)]) continue;
            lo = std::min(lo, i * m);
            hi = std::max(hi, (i + 1) * m);
            any = true;
        }
        if (any) break;
    }
    xl = lo;
    xr = hi;
    return any;
}

}  // namespace

double classical_location(const ContinuumHeight& hc, const LiquidRegion& liq, long long level,
                          double t, long long n, bool edge_refine) {
    double xl, xr;
    if (!liquid_slice(hc, liq, t, xl, xr))
        throw not_found_error("row has no liquid slice");
    double target = static_cast<double>(level) / static_cast<double>(n);
    const double m = hc.mesh();
    auto f = [&](double x) { return hc.value(x, t); };
    double fl = f(xl), fr = f(xr);
    // The slice endpoints carry the frozen plateau values up to solver
    // noise; levels just beyond them are the plateaus themselves.
    const double slack = 1e-3;
    if (target < fl - slack || target > fr + slack)
        throw not_found_error("level not attained on the liquid slice");
    target = std::clamp(target, fl, fr);
    const double tol = 1e-9;
    // Rightmost crossing by bisection on the nondecreasing row profile:
    // find sup{x : f(x) <= target} and report it.
    double a = xl, b = xr;
    if (target >= fr - tol) {
        b = xr;
        a = xr;
    } else {
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (a + b);
            if (f(mid) <= target)
                a = mid;
            else
                b = mid;
        }
    }
    double x_lin = 0.5 * (a + b);

    if (!edge_refine) return x_lin;

    // Near the right slice edge the profile behaves like
    // f(x) = f(xr) - A (xr - x)^{3/2}; fit A in a mesh window inside the
    // edge and invert.  Mirrored for the left edge.
    double d_r = xr - x_lin, d_l = x_lin - xl;
    bool right = d_r <= d_l;
    double edge = right ? xr : xl;
    double fedge = f(edge);
    if (std::fabs(d_r - d_l) < 2 * m) return x_lin;  // not in an edge zone
    double num = 0, den = 0;
    for (int k = 2; k <= 12; ++k) {
        double x = right ? edge - k * m : edge + k * m;
        if (x < xl || x > xr) break;
        double drop = std::fabs(fedge - f(x));
        double pw = std::pow(static_cast<double>(k) * m, 1.5);
        num += drop * pw;
        den += pw * pw;
    }
    if (den == 0) return x_lin;
    double coef = num / den;
    if (coef <= 0) return x_lin;
    double drop_target = std::fabs(fedge - target);
    double dist = std::pow(drop_target / coef, 2.0 / 3.0);
    double x_fit = right ? edge - dist : edge + dist;
    // Trust the local model only in its window.
    if (dist > 12 * m) return x_lin;
    return x_fit;
}

double gamma_expansion_residual(const ContinuumHeight& hc, const LiquidRegion& liq, double x0,
                                double t0, const CurvatureParams& cp, long long j, double t,
                                long long n) {
    long long bigk = static_cast<long long>(std::llround(static_cast<double>(n) * hc.value(x0, t0)));
    double gamma = classical_location(hc, liq, bigk - j, t, n, true);
    double s_const = std::pow(std::fabs(cp.l), 2.0 / 3.0) * std::pow(std::fabs(1.0 - cp.l), 2.0 / 3.0) /
                     std::pow(4.0, 1.0 / 3.0) / std::pow(std::fabs(cp.q), 1.0 / 3.0);
    double main = x0 + cp.l * (t - t0) + cp.q * (t - t0) * (t - t0) -
                  std::pow(s_const, 1.5) *
                      std::pow(3.0 * kPi * static_cast<double>(j) / (2.0 * static_cast<double>(n)),
                               2.0 / 3.0);
    return std::fabs(gamma - main);
}

std::vector<std::uint8_t> augmented_region(const ContinuumHeight& hc, const LiquidRegion& liq,
                                           double delta, long long n) {
    const LatticeDomain& d = *hc.grid();
    const double m = hc.mesh();
    const double r = std::pow(static_cast<double>(n), delta - 2.0 / 3.0);
    std::vector<std::uint8_t> out = liq.cell_mask;
    for (int j = d.y0(); j < d.y1(); ++j)
        for (int i = d.x0(); i < d.x1(); ++i) {
            if (!hc.cell_in_domain(i, j)) continue;
            std::size_t bi = d.index(i, j);
            if (out[bi]) continue;
            double cx = (i + 0.5) * m, cy = (j + 0.5) * m;
            if (distance_to_polyline(liq.arctic_polyline, cx, cy) <= r) out[bi] = 1;
        }
    return out;
}

std::vector<std::uint8_t> reduced_region(const ContinuumHeight& hc, const LiquidRegion& liq,
                                         double delta, long long n) {
    const LatticeDomain& d = *hc.grid();
    const double m = hc.mesh();
    const double r = std::pow(static_cast<double>(n), delta - 2.0 / 3.0);
    std::vector<std::uint8_t> out = liq.cell_mask;
    for (int j = d.y0(); j < d.y1(); ++j)
        for (int i = d.x0(); i < d.x1(); ++i) {
            std::size_t bi = d.index(i, j);
            if (!out[bi]) continue;
            double cx = (i + 0.5) * m, cy = (j + 0.5) * m;
            if (distance_to_polyline(liq.arctic_polyline, cx, cy) <= r) out[bi] = 0;
        }
    return out;
}

TiltReport measure_tilt(const HeightFunction& sample, const ContinuumHeight& hc,
                        const LiquidRegion& liq, double level,
                        const std::function<double(double)>& omega,
                        const std::vector<TiltEdgePoint>& edges, double delta) {
    const LatticeDomain& sd = *sample.domain();
    const long long n = sd.scale();
    const int row = static_cast<int>(std::llround(level * static_cast<double>(n)));
    TiltReport rep;

    double xl, xr;
    bool has_liquid = liquid_slice(hc, liq, level, xl, xr);
    const double rr = std::pow(static_cast<double>(n), delta - 2.0 / 3.0);

    for (int x = sd.x0(); x <= sd.x1(); ++x) {
        if (!sd.contains(x, row)) continue;
        double xs = static_cast<double>(x) / static_cast<double>(n);
        double dev = static_cast<double>(sample.at(x, row)) / static_cast<double>(n) -
                     hc.value(xs, level);
        if (has_liquid && xs > xl + rr && xs < xr - rr) {
            double om = omega(xs);
            rep.xi = std::max(rep.xi, om < -1e-12 ? std::fabs(dev) / (-om) : 0.0);
            rep.mu = std::max(rep.mu, std::fabs(dev));
            ++rep.bulk_points;
        }
    }

    // Smallest zeta satisfying both edge conditions, by scanning a grid of
    // candidates (the window grows with zeta while the bounds loosen, so
    // the predicate is checked directly).
    auto zeta_ok = [&](double zeta) {
        for (const TiltEdgePoint& e : edges) {
            for (int x = sd.x0(); x <= sd.x1(); ++x) {
                if (!sd.contains(x, row)) continue;
                double xs = static_cast<double>(x) / static_cast<double>(n);
                double hval = static_cast<double>(sample.at(x, row)) / static_cast<double>(n);
                bool outside = e.side > 0 ? xs >= e.x0 : xs <= e.x0;
                double dist = std::fabs(xs - e.x0);
                if (outside && dist >= zeta * std::fabs(e.upsilon)) {
                    if (std::fabs(hval - hc.value(xs, level)) > 1e-9 + 1.0 / static_cast<double>(n))
                        return false;
                }
                if (dist <= std::pow(zeta, 8.0 / 9.0)) {
                    double shift = zeta * e.upsilon;
                    double lo, hi;
                    if (e.frozen_dx == 0) {
                        lo = hc.value(xs - shift, level);
                        hi = hc.value(xs + shift, level);
                    } else {
                        lo = hc.value(xs - shift, level) + shift;
                        hi = hc.value(xs + shift, level) - shift;
                    }
                    double slack = 1.5 / static_cast<double>(n);
                    if (hval < std::min(lo, hi) - slack || hval > std::max(lo, hi) + slack)
                        return false;
                }
            }
        }
        return true;
    };
    double zeta = 0;
    bool found = false;
    for (double cand = 1.0 / static_cast<double>(n); cand < 1.0; cand *= 1.25) {
        if (zeta_ok(cand)) {
            zeta = cand;
            found = true;
            break;
        }
    }
    rep.zeta = found ? zeta : 1.0;
    rep.edge_points = edges.size();
    return rep;
}

}  // namespace arctic
