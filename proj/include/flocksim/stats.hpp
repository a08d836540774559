#pragma once

#include <functional>
#include <vector>

namespace flocksim {

// Frequency estimate with a Wilson score interval; chosen over Wald for
// small-count robustness (zero successes still give a usable upper bound).
struct FreqStat {
    long count = 0;
    long n = 0;
    double estimate = 0.0;
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const FreqStat&) const = default;
};

FreqStat wilson_interval(long count, long n, double z = 1.959963984540054);

struct MeanStat {
    double mean = 0.0;
    double se = 0.0; // sample std / sqrt(n)
};

MeanStat mean_se(const std::vector<double>& xs);

// Ordinary least squares y = intercept + slope * u.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 1.0;
};

LinearFit ols(const std::vector<double>& u, const std::vector<double>& y);

// Slope of an OLS line through (u, y) where each y_k carries an independent
// standard error; returns the propagated standard error of the slope.
struct SlopeStat {
    double slope = 0.0;
    double se = 0.0;
};

SlopeStat slope_with_se(const std::vector<double>& u, const std::vector<double>& y,
                        const std::vector<double>& y_se);

// Kolmogorov-Smirnov distance between the empirical law of `sample` and the
// continuous CDF `cdf`. The sample is copied and sorted internally.
double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf);

// Two-sided KS critical value at significance alpha for sample size n
// (asymptotic form).
double ks_critical(double alpha, std::size_t n);

double normal_cdf(double x);

// Regularized incomplete gamma functions, P(a,x) + Q(a,x) = 1.
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Inverse-gamma law with shape a and scale s: density proportional to
// x^{-a-1} exp(-s/x); CDF(x) = Q(a, s/x).
double inv_gamma_cdf(double x, double shape, double scale);

// Scale maximum-likelihood estimate for fixed shape: a / mean(1/x).
double inv_gamma_ml_scale(const std::vector<double>& sample, double shape);

} // namespace flocksim
