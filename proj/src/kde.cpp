#include "copadapt/kde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "copadapt/errors.hpp"
#include "copadapt/special.hpp"
#include "copadapt/stats.hpp"

namespace copadapt {

namespace {
constexpr double kCut1 = 8.0;
constexpr double kCut2 = 6.0;
}  // namespace

double silverman_bandwidth(std::span<const double> x) {
    if (x.size() < 2) throw PreconditionError("bandwidth needs at least two points");
    const double s = stats::sd(x);
    const double iqr = stats::quantile(x, 0.75) - stats::quantile(x, 0.25);
    double spread = s;
    if (iqr > 0.0) spread = std::min(s, iqr / 1.34);
    if (!(spread > 0.0)) throw DomainError("bandwidth undefined for a sample with zero spread");
    return 0.9 * spread * std::pow(static_cast<double>(x.size()), -0.2);
}

Kde1d::Kde1d(std::vector<double> sample, double bandwidth) : x_(std::move(sample)) {
    if (x_.empty()) throw PreconditionError("kde needs a nonempty sample");
    for (double v : x_)
        if (!std::isfinite(v)) throw DomainError("kde sample contains a non-finite value");
    std::sort(x_.begin(), x_.end());
    h_ = bandwidth > 0.0 ? bandwidth : silverman_bandwidth(x_);
}

double Kde1d::pdf(double x) const {
    const auto lo = std::lower_bound(x_.begin(), x_.end(), x - kCut1 * h_);
    const auto hi = std::upper_bound(lo, x_.end(), x + kCut1 * h_);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it) {
        const double z = (x - *it) / h_;
        s += std::exp(-0.5 * z * z);
    }
    return s / (static_cast<double>(x_.size()) * h_ * std::sqrt(2.0 * std::numbers::pi));
}

double Kde1d::cdf(double x) const {
    const auto lo = std::lower_bound(x_.begin(), x_.end(), x - kCut1 * h_);
    const auto hi = std::upper_bound(lo, x_.end(), x + kCut1 * h_);
    double s = static_cast<double>(lo - x_.begin());
    for (auto it = lo; it != hi; ++it) s += norm_cdf((x - *it) / h_);
    return s / static_cast<double>(x_.size());
}

GaussianTransformCopulaKde::GaussianTransformCopulaKde(std::span<const double> u, std::span<const double> v,
                                                       double bandwidth_scale) {
    if (u.size() != v.size()) throw ShapeError("copula kde: coordinate vectors differ in length");
    const std::size_t n = u.size();
    if (n < 2) throw PreconditionError("copula kde needs at least two points");
    if (!(bandwidth_scale > 0.0)) throw ConfigError("copula kde bandwidth scale must be positive");
    std::vector<double> z1(n), z2(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(u[i] > 0.0 && u[i] < 1.0 && v[i] > 0.0 && v[i] < 1.0))
            throw DomainError("copula kde pseudo-observations must lie in (0, 1)^2");
        z1[i] = norm_quantile(u[i]);
        z2[i] = norm_quantile(v[i]);
    }
    const double m1 = stats::mean(z1), m2 = stats::mean(z2);
    double s11 = 0.0, s22 = 0.0, s12 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        s11 += (z1[i] - m1) * (z1[i] - m1);
        s22 += (z2[i] - m2) * (z2[i] - m2);
        s12 += (z1[i] - m1) * (z2[i] - m2);
    }
    const double f = bandwidth_scale * bandwidth_scale * std::pow(static_cast<double>(n), -1.0 / 3.0) /
                     static_cast<double>(n - 1);
    const double h11 = s11 * f, h22 = s22 * f, h12 = s12 * f;
    const double det = h11 * h22 - h12 * h12;
    if (!(h11 > 0.0 && h22 > 0.0 && det > 1e-300 * h11 * h22)) throw DomainError("copula kde: degenerate sample");
    // H = L L^T (lower Cholesky); whitening uses A = L^-1.
    const double l11 = std::sqrt(h11);
    const double l21 = h12 / l11;
    const double l22 = std::sqrt(h22 - l21 * l21);
    a11_ = 1.0 / l11;
    a22_ = 1.0 / l22;
    a21_ = -l21 / (l11 * l22);
    log_norm_ = -std::log(2.0 * std::numbers::pi) - std::log(l11 * l22) - std::log(static_cast<double>(n));

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    std::vector<double> w1(n), w2(n);
    for (std::size_t i = 0; i < n; ++i) {
        w1[i] = a11_ * z1[i];
        w2[i] = a21_ * z1[i] + a22_ * z2[i];
    }
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return w1[a] < w1[b]; });
    w1_.resize(n);
    w2_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        w1_[i] = w1[idx[i]];
        w2_[i] = w2[idx[i]];
    }
}

double GaussianTransformCopulaKde::score_density(double z1, double z2) const {
    const double q1 = a11_ * z1;
    const double q2 = a21_ * z1 + a22_ * z2;
    const auto lo = std::lower_bound(w1_.begin(), w1_.end(), q1 - kCut2);
    const auto hi = std::upper_bound(lo, w1_.end(), q1 + kCut2);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it) {
        const std::size_t i = static_cast<std::size_t>(it - w1_.begin());
        const double d1 = q1 - *it;
        const double d2 = q2 - w2_[i];
        s += std::exp(-0.5 * (d1 * d1 + d2 * d2));
    }
    return s * std::exp(log_norm_);
}

double GaussianTransformCopulaKde::pdf(double u, double v) const {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) throw DomainError("copula kde evaluated outside (0, 1)^2");
    const double z1 = norm_quantile(u), z2 = norm_quantile(v);
    return score_density(z1, z2) / (norm_pdf(z1) * norm_pdf(z2));
}

}  // namespace copadapt
