#include "flocksim/stats.hpp"

#include <algorithm>
#include <cmath>

#include "flocksim/errors.hpp"

namespace flocksim {

FreqStat wilson_interval(long count, long n, double z) {
    if (n <= 0) throw EmptyEnsemble("wilson_interval: n must be positive");
    if (count < 0 || count > n) throw DomainError("wilson_interval: count outside [0, n]");
    FreqStat f;
    f.count = count;
    f.n = n;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(count) / nn;
    f.estimate = p;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = p + z2 / (2.0 * nn);
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn));
    f.lo = std::max(0.0, (center - half) / denom);
    f.hi = std::min(1.0, (center + half) / denom);
    return f;
}

MeanStat mean_se(const std::vector<double>& xs) {
    if (xs.empty()) throw EmptyEnsemble("mean_se: empty sample");
    MeanStat m;
    double s = 0.0;
    for (double x : xs) s += x;
    m.mean = s / static_cast<double>(xs.size());
    if (xs.size() < 2) {
        m.se = 0.0;
        return m;
    }
    double ss = 0.0;
    for (double x : xs) {
        const double dev = x - m.mean;
        ss += dev * dev;
    }
    const double var = ss / static_cast<double>(xs.size() - 1);
    m.se = std::sqrt(var / static_cast<double>(xs.size()));
    return m;
}

LinearFit ols(const std::vector<double>& u, const std::vector<double>& y) {
    if (u.size() != y.size() || u.size() < 2)
        throw DomainError("ols: need two or more matched points");
    const double n = static_cast<double>(u.size());
    double mu = 0.0, my = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        mu += u[i];
        my += y[i];
    }
    mu /= n;
    my /= n;
    double suu = 0.0, suy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double du = u[i] - mu;
        const double dy = y[i] - my;
        suu += du * du;
        suy += du * dy;
        syy += dy * dy;
    }
    if (suu == 0.0) throw DomainError("ols: abscissae are all equal");
    LinearFit f;
    f.slope = suy / suu;
    f.intercept = my - f.slope * mu;
    f.r_squared = (syy == 0.0) ? 1.0 : std::min(1.0, (suy * suy) / (suu * syy));
    return f;
}

SlopeStat slope_with_se(const std::vector<double>& u, const std::vector<double>& y,
                        const std::vector<double>& y_se) {
    if (u.size() != y.size() || u.size() != y_se.size() || u.size() < 2)
        throw DomainError("slope_with_se: need two or more matched points");
    const double n = static_cast<double>(u.size());
    double mu = 0.0;
    for (double v : u) mu += v;
    mu /= n;
    double suu = 0.0;
    for (double v : u) suu += (v - mu) * (v - mu);
    if (suu == 0.0) throw DomainError("slope_with_se: abscissae are all equal");
    SlopeStat s;
    double var = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double c = (u[i] - mu) / suu;
        s.slope += c * y[i];
        var += c * c * y_se[i] * y_se[i];
    }
    s.se = std::sqrt(var);
    return s;
}

double ks_distance(std::vector<double> sample, const std::function<double(double)>& cdf) {
    if (sample.empty()) throw EmptyEnsemble("ks_distance: empty sample");
    std::sort(sample.begin(), sample.end());
    const double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        const double f = cdf(sample[i]);
        const double above = (static_cast<double>(i) + 1.0) / n - f;
        const double below = f - static_cast<double>(i) / n;
        d = std::max(d, std::max(above, below));
    }
    return d;
}

double ks_critical(double alpha, std::size_t n) {
    if (!(alpha > 0.0 && alpha < 1.0) || n == 0)
        throw DomainError("ks_critical: need alpha in (0,1) and n > 0");
    return std::sqrt(-0.5 * std::log(0.5 * alpha)) / std::sqrt(static_cast<double>(n));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / 1.4142135623730951); }

namespace {

// log Gamma via the Lanczos approximation; adequate for the shape range
// exercised here (a > 0.1).
double log_gamma(double a) { return std::lgamma(a); }

double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int i = 0; i < 500; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma(a));
}

double gamma_q_contfrac(double a, double x) {
    // Lentz's algorithm on the continued fraction for Q(a, x).
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - log_gamma(a));
}

} // namespace

double gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_p: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return gamma_p_series(a, x);
    return 1.0 - gamma_q_contfrac(a, x);
}

double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw DomainError("gamma_q: need a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_contfrac(a, x);
}

double inv_gamma_cdf(double x, double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0)) throw DomainError("inv_gamma_cdf: bad parameters");
    if (x <= 0.0) return 0.0;
    return gamma_q(shape, scale / x);
}

double inv_gamma_ml_scale(const std::vector<double>& sample, double shape) {
    if (sample.empty()) throw EmptyEnsemble("inv_gamma_ml_scale: empty sample");
    if (!(shape > 0.0)) throw DomainError("inv_gamma_ml_scale: shape must be positive");
    double inv_sum = 0.0;
    for (double x : sample) {
        if (!(x > 0.0)) throw DomainError("inv_gamma_ml_scale: sample must be positive");
        inv_sum += 1.0 / x;
    }
    return shape * static_cast<double>(sample.size()) / inv_sum;
}

} // namespace flocksim
