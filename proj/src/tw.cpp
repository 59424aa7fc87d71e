#include <algorithm>
#include <cmath>
#include <vector>

#include "arctic/edge.hpp"
#include "arctic/errors.hpp"

namespace arctic {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Gauss-Legendre nodes and weights on (-1, 1) by Newton iteration.
void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
    x.resize(m);
    w.resize(m);
    for (int i = 0; i < m; ++i) {
        double t = std::cos(kPi * (i + 0.75) / (m + 0.5));
        for (int it = 0; it < 100; ++it) {
            double p0 = 1, p1 = t;
            for (int k = 2; k <= m; ++k) {
                double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            double dp = m * (t * p1 - p0) / (t * t - 1.0);
            double dt = p1 / dp;
            t -= dt;
            if (std::fabs(dt) < 1e-15) break;
        }
        double p0 = 1, p1 = t;
        for (int k = 2; k <= m; ++k) {
            double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        double dp = m * (t * p1 - p0) / (t * t - 1.0);
        x[i] = t;
        w[i] = 2.0 / ((1.0 - t * t) * dp * dp);
    }
}

double det_lu(std::vector<double>& a, int n) {
    double det = 1;
    for (int c = 0; c < n; ++c) {
        int piv = c;
        for (int r = c + 1; r < n; ++r)
            if (std::fabs(a[r * n + c]) > std::fabs(a[piv * n + c])) piv = r;
        if (piv != c) {
            for (int k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
            det = -det;
        }
        double d = a[c * n + c];
        if (d == 0) return 0;
        det *= d;
        for (int r = c + 1; r < n; ++r) {
            double f = a[r * n + c] / d;
            for (int k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
        }
    }
    return det;
}

#include "tw_table.inc"

}  // namespace

double tw_gue_cdf_nystrom(double s, int nodes) {
    // det(I - K) on L^2(s, inf): map xi in (-1,1) to u = s + L (1+xi)/(1-xi).
    const double scale = 8.0;
    std::vector<double> xi, w;
    gauss_legendre(nodes, xi, w);
    std::vector<double> u(nodes), sq(nodes);
    for (int i = 0; i < nodes; ++i) {
        u[i] = s + scale * (1.0 + xi[i]) / (1.0 - xi[i]);
        double du = 2.0 * scale / ((1.0 - xi[i]) * (1.0 - xi[i]));
        sq[i] = std::sqrt(w[i] * du);
    }
    std::vector<double> a(static_cast<std::size_t>(nodes) * nodes);
    for (int i = 0; i < nodes; ++i)
        for (int j = 0; j < nodes; ++j) {
            // Far-out nodes contribute nothing at double precision.
            double k = (u[i] > 120.0 || u[j] > 120.0) ? 0.0 : airy_kernel(u[i], u[j]);
            a[static_cast<std::size_t>(i) * nodes + j] = (i == j ? 1.0 : 0.0) - sq[i] * k * sq[j];
        }
    return det_lu(a, nodes);
}

double tw_gue_cdf(double x) {
    if (x < kTwTableLo || x > kTwTableHi)
        throw range_error("tw_gue_cdf: argument outside [-10, 6]");
    const double step = (kTwTableHi - kTwTableLo) / (kTwTableSize - 1);
    double pos = (x - kTwTableLo) / step;
    int i = std::min(static_cast<int>(pos), kTwTableSize - 2);
    double f = pos - i;
    // Monotone cubic Hermite interpolation (Fritsch-Carlson slopes).
    auto slope = [&](int k) {
        if (k <= 0) return (kTwTable[1] - kTwTable[0]) / step;
        if (k >= kTwTableSize - 1)
            return (kTwTable[kTwTableSize - 1] - kTwTable[kTwTableSize - 2]) / step;
        double d0 = (kTwTable[k] - kTwTable[k - 1]) / step;
        double d1 = (kTwTable[k + 1] - kTwTable[k]) / step;
        if (d0 * d1 <= 0) return 0.0;
        return 2.0 * d0 * d1 / (d0 + d1);
    };
    double y0 = kTwTable[i], y1 = kTwTable[i + 1];
    double m0 = slope(i) * step, m1 = slope(i + 1) * step;
    double f2 = f * f, f3 = f2 * f;
    double v = (2 * f3 - 3 * f2 + 1) * y0 + (f3 - 2 * f2 + f) * m0 + (-2 * f3 + 3 * f2) * y1 +
               (f3 - f2) * m1;
    return std::clamp(v, 0.0, 1.0);
}

void tw_gue_moments(double& mean, double& variance) {
    // Moments of the table law via E[X] = int x dF with the trapezoid rule
    // on the density F'.
    const double step = (kTwTableHi - kTwTableLo) / (kTwTableSize - 1);
    double m1 = 0, m2 = 0;
    for (int i = 0; i + 1 < kTwTableSize; ++i) {
        double x = kTwTableLo + (i + 0.5) * step;
        double df = kTwTable[i + 1] - kTwTable[i];
        m1 += x * df;
        m2 += x * x * df;
    }
    // Tail mass beyond the table is negligible at double precision.
    mean = m1;
    variance = m2 - m1 * m1;
}

}  // namespace arctic
