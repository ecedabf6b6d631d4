#pragma once

#include <cmath>
#include <numbers>
#include <span>

namespace copadapt {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2*pi))

inline double norm_pdf(double z) noexcept {
    return std::exp(-0.5 * z * z - kLogSqrt2Pi);
}

inline double norm_logpdf(double z) noexcept {
    return -0.5 * z * z - kLogSqrt2Pi;
}

inline double norm_cdf(double z) noexcept {
    return 0.5 * std::erfc(-z * 0.70710678118654752440);
}

// Inverse of norm_cdf on (0, 1); returns -inf/+inf at 0/1.
double norm_quantile(double p);

// P(X <= h, Y <= k) for a standard bivariate normal with correlation rho.
double bivariate_normal_cdf(double h, double k, double rho);

// Student-t(df) log density and CDF at x (standardised).
double student_t_logpdf(double x, double df);
double student_t_cdf(double x, double df);
double student_t_quantile(double p, double df);

double log_sum_exp(std::span<const double> values);

}  // namespace copadapt
