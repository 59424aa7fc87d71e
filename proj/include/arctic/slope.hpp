#ifndef ARCTIC_SLOPE_HPP
#define ARCTIC_SLOPE_HPP

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "arctic/limitshape.hpp"

namespace arctic {

using Complex = std::complex<double>;

// Argument in [-pi, 0] of a closed-lower-half-plane number.
double arg_star(Complex z);

// The complex slope of a liquid raw gradient: the unique f in the open
// lower half plane with
//   arg* f = -pi dH/dx  and  arg*(f + 1) = pi dH/dy.
// The triangle (0, -1, f) then has angles pi*(tile fractions).
Complex slope_to_f(HeightGradient g);

// Inverse map; throws domain_error at f in {0, -1}.
HeightGradient f_to_slope(Complex f);

// f evaluated at the liquid nodes of a solved limit shape from centered
// gradients.  Nodes outside the mask, or whose stencil leaves the mask,
// are absent.
struct ComplexSlopeField {
    DomainPtr grid;            // shares the ContinuumHeight grid
    double mesh = 0;
    std::vector<Complex> f;    // box-indexed
    std::vector<std::uint8_t> present;

    bool has(int i, int j) const { return present[grid->index(i, j)] != 0; }
    Complex at(int i, int j) const { return f[grid->index(i, j)]; }
};

ComplexSlopeField complex_slope_field(const ContinuumHeight& hc, const LiquidRegion& liq,
                                      double margin = 1e-3);

struct BurgersResidual {
    std::vector<double> residuals;  // per usable interior node
    double median = 0;
    std::size_t nodes = 0;
};

// Finite-difference residual of  d_t f + (d_x f) f / (f+1) = 0, with the
// median taken over nodes at least `guard` nodes away from the field edge.
BurgersResidual burgers_residual(const ComplexSlopeField& field, int guard = 2);

// Residual of the ratio identity  d_t f / d_x f = -f/(f+1)  (relative).
BurgersResidual burgers_ratio_residual(const ComplexSlopeField& field, int guard = 2);

struct SqrtFit {
    double coefficient = 0;
    double exponent = 0;
    std::size_t points = 0;
};

// Log-log fit of |f(x) - f(x0)| against |x - x0| approaching a boundary
// point along a row; the exponent sits near 1/2 at generic edge points.
SqrtFit edge_sqrt_fit(const ComplexSlopeField& field, double x0, double t0, int side,
                      int window = 12);
// Same fit applied to the raw gradient d_x H of the limit shape.
SqrtFit edge_sqrt_fit_gradient(const ContinuumHeight& hc, double x0, double t0, int side,
                               int window = 12);

// Local jet of the boundary analytic function at an arctic point:
// Q0'(f0) = x0 - t0 (double-root condition) and higher derivatives from
// differencing x - t along the boundary arc.
struct Q0Jet {
    double f0 = 0;        // real boundary value of f
    double x0 = 0, t0 = 0;
    double q0 = 0;        // Q0(f0) = x0 (f0+1) - t0 f0
    double q0p = 0;       // = x0 - t0
    double q0pp = 0;
    double q0ppp = 0;
};

// Arc parametrization for jet extraction: position and tangent direction
// as functions of a parameter.
struct BoundaryArc {
    std::function<double(double)> x;
    std::function<double(double)> t;
    // dx/dt along the curve at parameter value.
    std::function<double(double)> slope_xy;
};

BoundaryArc conic_arc(const Conic& conic, bool upper_branch);

// Jet at arc parameter th0, by centered differences with step dth.
Q0Jet reconstruct_q0_jet(const BoundaryArc& arc, double th0, double dth = 1e-3);

struct LqqResidual {
    double l_formula = 0, q_formula = 0;
    double l_geometric = 0, q_geometric = 0;
    double l_rel = 0, q_rel = 0;
};

// Curvature parameters against   l = f/(f+1),
// q = -(1/2) (f+1)^{-3} / Q0''(f)  at an arctic point.
LqqResidual lqq_check(const Q0Jet& jet, const CurvatureParams& geometric);

// Bulk and edge response coefficients
//   Omega = Im f / (pi |f+1|^2)  (nonpositive),   Upsilon = f/(f+1)^2.
void omega_upsilon(Complex f, double& omega, Complex& upsilon);

struct TiltParams {
    double xi1 = 0, xi2 = 0;
    double t1 = 0, t2 = 0;
    double t0 = 0;      // (xi2 t1 - xi1 t2) / (xi2 - xi1)
    double alpha0 = 0;  // (xi2 - xi1)/(t2 - t1) + 1
    double omega(double y) const {
        return xi2 * (y - t1) / (t2 - t1) + xi1 * (t2 - y) / (t2 - t1);
    }
};

TiltParams tilt_params(double xi1, double xi2, double t1, double t2);

// Local cubic model of Q0 around the jet's base point, and its
// alpha-deformation  Q0a(u) = (u+1)/(u/alpha + 1) * Q0(u/alpha).
class LocalQ0Model {
public:
    explicit LocalQ0Model(const Q0Jet& jet) : jet_(jet) {}

    double q0(double u) const;
    double q0p(double u) const;
    double q0pp(double u) const;
    Complex q0(Complex u) const;
    Complex q0p(Complex u) const;

    double q0a(double u, double alpha) const;
    double q0a_p(double u, double alpha) const;   // derivative in u
    Complex q0a(Complex u, double alpha) const;
    Complex q0a_p(Complex u, double alpha) const;

    const Q0Jet& jet() const { return jet_; }

private:
    Q0Jet jet_;
};

// Q0 reconstructed along a boundary arc: the double-root condition pins
// Q0'(f(th)) = x(th) - t(th) on the whole real f-interval swept by the
// arc, so a polynomial fit there continues Q0' (and its antiderivative)
// to complex arguments near the interval.
class ArcQ0Model {
public:
    ArcQ0Model(const BoundaryArc& arc, double th_lo, double th_hi, int samples = 120,
               int degree = 8);

    Complex q0p(Complex f) const;   // fitted Q0'
    Complex q0(Complex f) const;    // antiderivative, pinned at the anchor
    Complex q0a(Complex u, double alpha) const;    // deformed Q0
    Complex q0a_p(Complex u, double alpha) const;  // its derivative
    double f_lo() const { return f_lo_; }
    double f_hi() const { return f_hi_; }
    double anchor_f() const { return f_anchor_; }

    // Distance from a plane point to the sampled arc (the fit only
    // continues reliably near its own branch of the curve).
    double distance_to_arc(double x, double t) const;

private:
    std::vector<double> coeffs_;  // Q0' in powers of (2 f/(f+1) - 1)
    std::vector<std::array<double, 2>> arc_points_;
    double center_ = 0;
    double f_lo_ = 0, f_hi_ = 0;
    double f_anchor_ = 0;  // Q0(anchor) matches the defining relation
    double q0_anchor_ = 0;
};

struct EndpointShift {
    double predicted = 0;  // t (alpha-1) Upsilon
    double solved = 0;     // from the deformed double-root system
    double residual = 0;   // |solved - predicted|
};

// Boundary-point displacement under the alpha-deformation: solves the
// deformed double-root system on the local model by Newton iteration and
// compares with the first-order prediction.
EndpointShift deformed_endpoint_check(const Q0Jet& jet, double alpha);

struct InteriorLogCheck {
    Complex lhs;        // log F(x;alpha) - log alpha - log F(x;1)
    Complex predicted;  // t (1-alpha) d_x (F/(F+1))
    double rel_residual = 0;
    double d = 0;       // coordinate distance to the boundary point
};

// First-order response of log F to the deformation at an interior point
// (x, t): the undeformed and deformed slopes both solve the reconstructed
// equation, and the x-derivative comes from the same model.
InteriorLogCheck interior_log_perturbation_check(const ArcQ0Model& model, double x0, double x,
                                                 double t, double alpha);

struct DerivativeIdentityStats {
    double median_dx = 0;   // relative residual of d_x f formula
    double median_dt = 0;
    double median_ratio = 0;  // residual of the ratio identity
    std::size_t nodes = 0;
};

// Residuals of  d_x f = (f+1)/(Q0'(f) - x + t)  and
// d_t f = -f/(Q0'(f) - x + t)  over field nodes whose slope value lies in
// the model's continuation range.
DerivativeIdentityStats derivative_identity_check(const ComplexSlopeField& field,
                                                  const ArcQ0Model& model,
                                                  int min_cells_from_edge = 10);

}  // namespace arctic

#endif
