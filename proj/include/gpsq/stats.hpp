#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "gpsq/errors.hpp"

namespace gpsq {

struct Interval {
    double low = 0.0;
    double high = 0.0;
    double half_width() const { return 0.5 * (high - low); }
};

inline double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

// Inverse standard normal CDF, Acklam's rational approximation refined by one
// Halley step; relative error below 1e-13 on (0,1).
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw ParameterError("normal_quantile: p must lie in (0,1)");

    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};

    const double p_low = 0.02425;
    double x;
    if (p < p_low) {
        double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        double q = p - 0.5;
        double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // Halley refinement against erfc.
    double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
    return x;
}

// Wilson score interval for a binomial proportion; well behaved near 0 and 1
// where the Wald interval degenerates.
inline Interval wilson_interval(std::size_t successes, std::size_t n,
                                double confidence = 0.95) {
    if (n == 0) throw ParameterError("wilson_interval: n must be positive");
    if (successes > n)
        throw ParameterError("wilson_interval: successes exceed trials");
    if (!(confidence > 0.0 && confidence < 1.0))
        throw ParameterError("wilson_interval: confidence must lie in (0,1)");

    double z = normal_quantile(0.5 * (1.0 + confidence));
    double nn = static_cast<double>(n);
    double p = static_cast<double>(successes) / nn;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double centre = (p + z2 / (2.0 * nn)) / denom;
    double spread =
        z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - spread), std::min(1.0, centre + spread)};
}

struct MeanVar {
    double mean = 0.0;
    double variance = 0.0;  // unbiased, n-1 in the denominator
    std::size_t n = 0;
};

inline MeanVar mean_variance(std::span<const double> xs) {
    MeanVar mv;
    mv.n = xs.size();
    if (mv.n == 0) return mv;
    double sum = 0.0;
    for (double x : xs) sum += x;
    mv.mean = sum / static_cast<double>(mv.n);
    if (mv.n < 2) return mv;
    double ss = 0.0;
    for (double x : xs) {
        double d = x - mv.mean;
        ss += d * d;
    }
    mv.variance = ss / static_cast<double>(mv.n - 1);
    return mv;
}

// One-sample Kolmogorov-Smirnov statistic against a continuous CDF.
// Sorts the sample in place.
template <class Cdf>
double ks_statistic(std::vector<double>& sample, Cdf&& cdf) {
    if (sample.empty()) throw ParameterError("ks_statistic: empty sample");
    std::sort(sample.begin(), sample.end());
    double n = static_cast<double>(sample.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        double f = cdf(sample[i]);
        double hi = (static_cast<double>(i) + 1.0) / n - f;
        double lo = f - static_cast<double>(i) / n;
        d = std::max(d, std::max(hi, lo));
    }
    return d;
}

// Survival function of the Kolmogorov distribution,
// P(K > x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2).
inline double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 101; ++k) {
        double term = std::exp(-2.0 * k * k * x * x);
        sum += sign * term;
        sign = -sign;
        if (term < 1e-16) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

// Asymptotic p-value for a KS statistic d computed from n samples.
inline double ks_pvalue(double d, std::size_t n) {
    double rn = std::sqrt(static_cast<double>(n));
    return kolmogorov_sf((rn + 0.12 + 0.11 / rn) * d);
}

// Critical value of sqrt(n)*D at the given significance level (asymptotic):
// the test rejects when sqrt(n)*D exceeds this.
inline double ks_critical(double significance) {
    if (!(significance > 0.0 && significance < 1.0))
        throw ParameterError("ks_critical: significance must lie in (0,1)");
    // Solve kolmogorov_sf(x) = significance by bisection.
    double lo = 1e-3, hi = 4.0;
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        if (kolmogorov_sf(mid) > significance)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace gpsq
