#include "onebit/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace onebit {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kLogSqrt2Pi = 0.9189385332046727;  // log(sqrt(2*pi))
constexpr double kSqrt2Pi = 2.5066282746310002;

// Rational approximation for the inverse normal CDF (Acklam), relative error
// below 1.2e-9 everywhere; refined below to full precision.
double quantile_estimate(double p) {
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

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
               (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    }
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
}

}  // namespace

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

double std_normal_pdf(double x) { return std::exp(-0.5 * x * x - kLogSqrt2Pi); }

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("std_normal_quantile: p must lie in (0,1)");
    double x = quantile_estimate(p);
    // One Halley step; skipped where the density underflows (the rational
    // estimate is already well below any statistical resolution there).
    const double pdf = std_normal_pdf(x);
    if (pdf > 0.0) {
        const double err = std_normal_cdf(x) - p;
        const double u = err / pdf;
        x -= u / (1.0 + 0.5 * x * u);
    }
    return x;
}

double log_std_normal_cdf(double x) {
    if (x >= -8.0) return std::log(std_normal_cdf(x));
    // Tail: Phi(x) = phi(x)/(-x) * [1 - 1/x^2 + 3/x^4 - 15/x^6 + 105/x^8 - ...]
    const double inv2 = 1.0 / (x * x);
    const double series =
        -inv2 * (1.0 - inv2 * (3.0 - inv2 * (15.0 - inv2 * (105.0 - inv2 * 945.0))));
    return -0.5 * x * x - kLogSqrt2Pi - std::log(-x) + std::log1p(series);
}

}  // namespace onebit
