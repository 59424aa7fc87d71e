#ifndef ARCTIC_LIMITSHAPE_HPP
#define ARCTIC_LIMITSHAPE_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "arctic/lattice.hpp"
#include "arctic/tiling.hpp"

namespace arctic {

// Slopes come in two equivalent parametrizations.
//
// HeightGradient is the raw gradient (dH/dx, dH/dy) of a height profile;
// admissible raw gradients fill the triangle
//     dx in [0,1],  dy in [-1,0],  0 <= dx + dy <= 1,
// whose corners are the three frozen phases (0,0), (1,0), (1,-1).
//
// Slope is the surface-tension parametrization (s,t) with
//     s >= 0,  t <= 0,  0 <= s - t <= 1,
// related to the raw gradient by s = dx + dy, t = dy.  The local tile
// fractions are (s, -t, 1-s+t).
struct HeightGradient {
    double dx = 0, dy = 0;
};

struct Slope {
    double s = 0, t = 0;
};

inline Slope slope_from_gradient(HeightGradient g) { return {g.dx + g.dy, g.dy}; }
inline HeightGradient gradient_from_slope(Slope sl) { return {sl.s - sl.t, sl.t}; }

// Smallest of the three tile fractions; positive exactly on the open
// slope triangle.
inline double slope_margin(Slope sl) {
    return std::min(sl.s, std::min(-sl.t, 1.0 - sl.s + sl.t));
}

// L(x) = -int_0^x log|2 sin z| dz, by adaptive quadrature with explicit
// treatment of the logarithmic endpoint singularity.  |error| < 1e-10.
double lobachevsky(double x);

// sigma(s,t) = (L(pi*s) + L(-pi*t) + L(pi*(1-s+t))) / pi on the closed
// slope triangle; zero at the three frozen corners.
double surface_tension(Slope sl);

// Partial derivatives of sigma on the open triangle.
void surface_tension_grad(Slope sl, double& ds, double& dt);

// Gradient and Hessian entries together (the Hessian is negative
// semidefinite on the open triangle).
void surface_tension_grad_hess(Slope sl, double& ds, double& dt, double& dss, double& dst,
                               double& dtt);

// Conic A x^2 + B xy + C y^2 + D x + E y + F = 0.
struct Conic {
    double a = 0, b = 0, c = 0, d = 0, e = 0, f = 0;

    double eval(double x, double y) const {
        return a * x * x + b * x * y + c * y * y + d * x + e * y + f;
    }
    // dx/dy along the curve.
    double dx_dy(double x, double y) const;
    // x-solutions at height y (smaller first); empty if none.
    std::vector<double> solve_x(double y) const;
};

// Unique conic tangent to all six side lines of the a x b x c hexagon.
Conic hexagon_inscribed_ellipse(double a, double b, double c);

struct CurvatureParams {
    double l = 0;  // linear coefficient of x(y) at the base point
    double q = 0;  // quadratic coefficient
};

// Local expansion x - x0 = l (y-y0) + q (y-y0)^2 + O((y-y0)^3) of a conic
// arc.  Throws tangency_error when the tangent slope lies in {0,1,inf}.
CurvatureParams conic_curvature(const Conic& conic, double x0, double y0);

// Same expansion fitted to a polyline by weighted least squares over the
// window |y - y0| <= window.
CurvatureParams polyline_curvature(const std::vector<std::array<double, 2>>& polyline,
                                   double x0, double y0, double window);

// Mesh-sampled maximizer of the entropy functional.
class ContinuumHeight {
public:
    ContinuumHeight(DomainPtr grid, double mesh, std::vector<double> values);

    const DomainPtr& grid() const { return grid_; }
    double mesh() const { return mesh_; }
    const std::vector<double>& raw() const { return values_; }
    std::vector<double>& raw() { return values_; }

    // Grid node (i,j) sits at physical point (i*mesh, j*mesh).
    double at_node(int i, int j) const { return values_[grid_->index(i, j)]; }
    double& at_node(int i, int j) { return values_[grid_->index(i, j)]; }

    // Piecewise-linear interpolation over the lattice triangles.
    double value(double x, double y) const;

    // Average raw gradient of the (up to two) triangles of cell (i,j).
    HeightGradient cell_gradient(int i, int j) const;
    // Centered raw gradient at an interior node.
    HeightGradient node_gradient(int i, int j) const;

    // Smallest tile fraction among the cell's triangles; negative for
    // cells outside the domain.
    double cell_margin(int i, int j) const;

    bool cell_in_domain(int i, int j) const;

private:
    DomainPtr grid_;
    double mesh_;
    std::vector<double> values_;
};

struct SolveOptions {
    int max_sweeps = 4000;
    double move_tol = 3e-10;        // sweep stops when no vertex moves more
    double clamp = 1e-6;            // kept distance from the cone boundary
    double over_relax = 1.9;
    bool coarse_init = true;
    std::function<void(int, double)> progress;  // sweep, max move
};

struct SolveReport {
    int sweeps = 0;
    double max_move = 0;
    double stationarity = 0;  // max |d objective / d H_v| over liquid nodes
    double entropy = 0;
    bool clamped = false;     // some update was limited by the clamp
};

// Concave maximization of the entropy functional over grid functions with
// the fixed scaled boundary data, by exact per-vertex coordinate ascent.
ContinuumHeight solve_limit_shape(const PolygonSpec& spec, double mesh,
                                  const SolveOptions& opts = {}, SolveReport* report = nullptr);

double entropy_functional(const ContinuumHeight& hc);

struct LiquidRegion {
    std::vector<std::uint8_t> cell_mask;  // box-indexed by the cell anchor node
    std::vector<std::array<double, 2>> arctic_polyline;  // closed chain
    double tol = 1e-3;
};

LiquidRegion extract_liquid_region(const ContinuumHeight& hc, double tol = 1e-3);

double distance_to_polyline(const std::vector<std::array<double, 2>>& poly, double x, double y);

// sup{x : n H(x,t) = level} over the closed liquid slice of row t.
// With edge_refine, the crossing near a slice edge is corrected by the
// local 3/2-power profile fitted to the mesh values.
double classical_location(const ContinuumHeight& hc, const LiquidRegion& liq, long long level,
                          double t, long long n, bool edge_refine = false);

// |gamma_{K-j}(t) - (x0 + l (t-t0) + q (t-t0)^2 - s^{3/2} (3 pi j / 2n)^{2/3})|.
double gamma_expansion_residual(const ContinuumHeight& hc, const LiquidRegion& liq, double x0,
                                double t0, const CurvatureParams& cp, long long j, double t,
                                long long n);

// Cells within distance n^(delta - 2/3) of the arctic polyline, added to
// (or removed from) the liquid mask.
std::vector<std::uint8_t> augmented_region(const ContinuumHeight& hc, const LiquidRegion& liq,
                                           double delta, long long n);
std::vector<std::uint8_t> reduced_region(const ContinuumHeight& hc, const LiquidRegion& liq,
                                         double delta, long long n);

struct TiltReport {
    double xi = 0;    // bulk coefficient against -Omega, with mu = 0
    double mu = 0;    // plain sup deviation, with xi = 0
    double zeta = 0;  // edge coefficient
    std::size_t bulk_points = 0;
    std::size_t edge_points = 0;
};

struct TiltEdgePoint {
    double x0 = 0;       // arctic point on the level
    double upsilon = 0;  // edge response there
    int frozen_dx = 0;   // frozen d_x H on the far side (0 or 1)
    int side = +1;       // +1: frozen region to the right, -1: to the left
};

// Measures the tilt coefficients of a lattice sample against the solved
// limit shape along one horizontal level.
TiltReport measure_tilt(const HeightFunction& sample, const ContinuumHeight& hc,
                        const LiquidRegion& liq, double level,
                        const std::function<double(double)>& omega,
                        const std::vector<TiltEdgePoint>& edges, double delta = 0.1);

}  // namespace arctic

#endif
