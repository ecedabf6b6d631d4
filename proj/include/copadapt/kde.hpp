#pragma once

#include <span>
#include <vector>

namespace copadapt {

// Silverman's rule of thumb: 0.9 * min(sd, IQR / 1.34) * n^(-1/5).
double silverman_bandwidth(std::span<const double> x);

// Univariate Gaussian-kernel density estimate. Kernels further than eight
// bandwidths away are skipped, so evaluation cost depends on the local
// sample density only.
class Kde1d {
public:
    // bandwidth <= 0 selects Silverman's rule.
    explicit Kde1d(std::vector<double> sample, double bandwidth = 0.0);

    double pdf(double x) const;
    // Kernel-smoothed empirical CDF.
    double cdf(double x) const;

    double bandwidth() const noexcept { return h_; }
    std::size_t size() const noexcept { return x_.size(); }
    const std::vector<double>& sorted_sample() const noexcept { return x_; }

private:
    std::vector<double> x_;
    double h_;
};

// Kernel copula density by the Gaussian transformation: pseudo-observations
// are mapped to normal scores z = Phi^-1(u), a bivariate Gaussian KDE with
// bandwidth matrix H = scale^2 * n^(-1/3) * Cov(z) is fitted there, and the
// result is divided by phi(z1) phi(z2).
class GaussianTransformCopulaKde {
public:
    // bandwidth_scale multiplies the default n^(-1/6) factor on the
    // standard deviations.
    GaussianTransformCopulaKde(std::span<const double> u, std::span<const double> v, double bandwidth_scale = 1.0);

    double pdf(double u, double v) const;
    // Density of the normal-score KDE itself, before dividing by the
    // standard normal marginals.
    double score_density(double z1, double z2) const;

private:
    // Whitened scores, sorted by the first coordinate.
    std::vector<double> w1_, w2_;
    // z -> w = A z with A lower-triangular, A^T A = H^-1.
    double a11_ = 1.0, a21_ = 0.0, a22_ = 1.0;
    double log_norm_ = 0.0;
};

}  // namespace copadapt
