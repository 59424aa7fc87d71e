#ifndef ARCTIC_STATS_HPP
#define ARCTIC_STATS_HPP

#include <cstddef>
#include <vector>

namespace arctic {

// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x),
// by series for x < a+1 and continued fraction otherwise.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-squared distribution with k degrees of
// freedom, i.e. the p-value of an observed statistic.
double chi2_sf(double stat, int dof);

// Pearson chi-squared statistic against given expected counts.
double chi2_stat(const std::vector<double>& observed,
                 const std::vector<double>& expected);

// Mean and (unbiased) variance by pairwise summation; the reduction order
// is fixed by the index structure, not by thread scheduling.
double pairwise_sum(const double* data, std::size_t n);
double sample_mean(const std::vector<double>& xs);
double sample_variance(const std::vector<double>& xs);

// Two-sided Kolmogorov-Smirnov distance of a sample against a CDF.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        double lo = static_cast<double>(i) / n;
        double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(f - lo, hi - f));
    }
    return d;
}

// KS distance between two empirical samples.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// Pearson correlation.
double correlation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace arctic

#endif
