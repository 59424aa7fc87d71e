#include "arctic/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "arctic/errors.hpp"

namespace arctic {

namespace {

// Series representation of P(a,x), valid for x < a+1.
double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Continued fraction for Q(a,x), valid for x >= a+1 (modified Lentz).
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 500; ++i) {
        double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
    if (x < 0 || a <= 0) throw invalid_argument_error("gamma_p: bad arguments");
    if (x == 0) return 0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_cf(a, x);
}

double gamma_q(double a, double x) {
    if (x < 0 || a <= 0) throw invalid_argument_error("gamma_q: bad arguments");
    if (x == 0) return 1;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi2_sf(double stat, int dof) {
    if (dof <= 0) throw invalid_argument_error("chi2_sf: dof must be positive");
    if (stat <= 0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * stat);
}

double chi2_stat(const std::vector<double>& observed,
                 const std::vector<double>& expected) {
    if (observed.size() != expected.size())
        throw invalid_argument_error("chi2_stat: size mismatch");
    double s = 0;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0)
            throw invalid_argument_error("chi2_stat: nonpositive expected count");
        double d = observed[i] - expected[i];
        s += d * d / expected[i];
    }
    return s;
}

double pairwise_sum(const double* data, std::size_t n) {
    if (n <= 8) {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i) s += data[i];
        return s;
    }
    std::size_t half = n / 2;
    return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double sample_mean(const std::vector<double>& xs) {
    if (xs.empty()) throw invalid_argument_error("sample_mean: empty sample");
    return pairwise_sum(xs.data(), xs.size()) / static_cast<double>(xs.size());
}

double sample_variance(const std::vector<double>& xs) {
    if (xs.size() < 2) throw invalid_argument_error("sample_variance: need n >= 2");
    double m = sample_mean(xs);
    std::vector<double> sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
    return pairwise_sum(sq.data(), sq.size()) / static_cast<double>(xs.size() - 1);
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty())
        throw invalid_argument_error("ks_two_sample: empty sample");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0;
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na -
                                  static_cast<double>(j) / nb));
    }
    return d;
}

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.size() < 2)
        throw invalid_argument_error("correlation: bad sizes");
    double ma = sample_mean(a), mb = sample_mean(b);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace arctic
