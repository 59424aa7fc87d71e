#include <cmath>

#include "arctic/edge.hpp"
#include "arctic/errors.hpp"

namespace arctic {

namespace {

constexpr long double kAi0 = 0.3550280538878172392600631860041831763980;   // 3^{-2/3}/Gamma(2/3)
constexpr long double kAip0 = -0.2588194037928067984051835601892039634793;  // -3^{-1/3}/Gamma(1/3)
constexpr double kSqrtPi = 1.7724538509055160272981674833411451827975;

// Maclaurin pair f, g with Ai = Ai(0) f + Ai'(0) g.  Extended precision
// absorbs the cancellation near the far end of the series range.
void airy_series(double x, double& ai, double& aip) {
    long double xl = x;
    long double x3 = xl * xl * xl;
    // f = sum a_k with a_0 = 1, a_{k+1} = a_k x^3 / ((3k+2)(3k+3));
    // g = sum b_k with b_0 = x, b_{k+1} = b_k x^3 / ((3k+3)(3k+4));
    // term-wise derivatives carry the factors 3k+3 and 3k+4 over x.
    long double a = 1, b = xl;
    long double f = a, g = b;
    long double fp = 0, gp = 1;
    for (int k = 0; k < 120; ++k) {
        long double den_a = (3.0L * k + 2.0L) * (3.0L * k + 3.0L);
        long double den_b = (3.0L * k + 3.0L) * (3.0L * k + 4.0L);
        long double a_next = a * x3 / den_a;
        long double b_next = b * x3 / den_b;
        long double xsafe = x == 0 ? 1 : xl;
        fp += (3.0L * k + 3.0L) * a_next / xsafe;
        gp += (3.0L * k + 4.0L) * b_next / xsafe;
        f += a_next;
        g += b_next;
        a = a_next;
        b = b_next;
        if (std::fabs(static_cast<double>(a)) + std::fabs(static_cast<double>(b)) <
            1e-22 * (std::fabs(static_cast<double>(f)) + std::fabs(static_cast<double>(g)) + 1))
            break;
    }
    ai = static_cast<double>(kAi0 * f + kAip0 * g);
    aip = static_cast<double>(kAi0 * fp + kAip0 * gp);
}

// Asymptotic expansions for |x| > 7 (DLMF 9.7).
void airy_asymptotic_pos(double x, double& ai, double& aip) {
    double zeta = 2.0 / 3.0 * std::pow(x, 1.5);
    double su = 1, sv = 1;
    double u = 1, v = 1;
    double term = 1;
    for (int k = 1; k <= 40; ++k) {
        u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
             (216.0 * k * (2.0 * k - 1.0));
        v = u * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
        double tu = u * std::pow(-1.0 / zeta, k);
        double tv = v * std::pow(-1.0 / zeta, k);
        if (std::fabs(tu) > std::fabs(term)) break;  // optimal truncation
        term = tu;
        su += tu;
        sv += tv;
    }
    double pre = std::exp(-zeta) / (2.0 * kSqrtPi * std::pow(x, 0.25));
    ai = pre * su;
    aip = -std::pow(x, 0.25) * std::exp(-zeta) / (2.0 * kSqrtPi) * sv;
}

void airy_asymptotic_neg(double xneg, double& ai, double& aip) {
    double z = -xneg;  // z > 0
    double zeta = 2.0 / 3.0 * std::pow(z, 1.5);
    // Even/odd splits of the u and v series at argument zeta.
    double ue = 1, uo = 0, ve = 1, vo = 0;
    double u = 1;
    double prev = 1e300;
    for (int k = 1; k <= 40; ++k) {
        u *= (6.0 * k - 5.0) * (6.0 * k - 3.0) * (6.0 * k - 1.0) /
             (216.0 * k * (2.0 * k - 1.0));
        double v = u * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
        double t = u / std::pow(zeta, k);
        if (std::fabs(t) > prev) break;
        prev = std::fabs(t);
        double sign = (k / 2) % 2 ? -1.0 : 1.0;  // (-1)^{floor(k/2)}
        if (k % 2 == 0) {
            ue += sign * u / std::pow(zeta, k);
            ve += sign * v / std::pow(zeta, k);
        } else {
            uo += sign * u / std::pow(zeta, k);
            vo += sign * v / std::pow(zeta, k);
        }
    }
    constexpr double pi = 3.14159265358979323846;
    double c = std::cos(zeta - 0.25 * pi), s = std::sin(zeta - 0.25 * pi);
    ai = (c * ue + s * uo) / (kSqrtPi * std::pow(z, 0.25));
    aip = (s * ve - c * vo) * std::pow(z, 0.25) / kSqrtPi;
}

}  // namespace

double airy_ai(double x) {
    if (std::fabs(x) > 200) throw range_error("airy_ai: |x| > 200");
    double ai, aip;
    if (std::fabs(x) <= 7.0)
        airy_series(x, ai, aip);
    else if (x > 0)
        airy_asymptotic_pos(x, ai, aip);
    else
        airy_asymptotic_neg(x, ai, aip);
    return ai;
}

double airy_ai_prime(double x) {
    if (std::fabs(x) > 200) throw range_error("airy_ai_prime: |x| > 200");
    double ai, aip;
    if (std::fabs(x) <= 7.0)
        airy_series(x, ai, aip);
    else if (x > 0)
        airy_asymptotic_pos(x, ai, aip);
    else
        airy_asymptotic_neg(x, ai, aip);
    return aip;
}

double airy_kernel(double x, double y) {
    if (std::fabs(x - y) < 1e-7) {
        double m = 0.5 * (x + y);
        double a = airy_ai(m), ap = airy_ai_prime(m);
        return ap * ap - m * a * a;
    }
    return (airy_ai(x) * airy_ai_prime(y) - airy_ai_prime(x) * airy_ai(y)) / (x - y);
}

namespace {

double simpson_adaptive(double (*f)(double, const double*), const double* ctx, double a,
                        double b, double fa, double fm, double fb, double whole, double tol,
                        int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm, ctx), frm = f(rm, ctx);
    double left = (m - a) / 6 * (fa + 4 * flm + fm);
    double right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 15 * tol)
        return left + right + (left + right - whole) / 15;
    return simpson_adaptive(f, ctx, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_adaptive(f, ctx, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double kernel_integrand(double u, const double* ctx) {
    // ctx: {t - s, x, y}
    return std::exp(u * ctx[0]) * airy_ai(ctx[1] + u) * airy_ai(ctx[2] + u);
}

double integrate(const double* ctx, double a, double b, double tol) {
    // Piecewise adaptive Simpson over unit-length panels keeps the
    // oscillatory negative side under control.
    double total = 0;
    double step = std::min(4.0, b - a);
    double lo = a;
    while (lo < b) {
        double hi = std::min(b, lo + step);
        double fa = kernel_integrand(lo, ctx), fb = kernel_integrand(hi, ctx);
        double fm = kernel_integrand(0.5 * (lo + hi), ctx);
        double whole = (hi - lo) / 6 * (fa + 4 * fm + fb);
        total += simpson_adaptive(kernel_integrand, ctx, lo, hi, fa, fm, fb, whole, tol, 30);
        lo = hi;
    }
    return total;
}

}  // namespace

double extended_airy_kernel(double s, double x, double t, double y) {
    if (!(std::isfinite(s) && std::isfinite(x) && std::isfinite(t) && std::isfinite(y)))
        throw range_error("extended_airy_kernel: non-finite arguments");
    double ctx[3] = {t - s, x, y};
    if (s >= t) {
        // Decay from both the Airy factors and (for s > t) the exponential.
        double upper = std::max(0.0, -std::min(x, y)) + 40.0;
        return integrate(ctx, 0.0, upper, 1e-11);
    }
    double rate = t - s;
    if (rate < 1e-3) throw range_error("extended_airy_kernel: s<t with vanishing gap");
    double lower = -std::max(80.0 / rate, 40.0);
    if (lower < -1e6) throw range_error("extended_airy_kernel: divergent regime");
    return -integrate(ctx, lower, 0.0, 1e-11);
}

}  // namespace arctic
