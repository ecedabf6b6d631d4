#include "copadapt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "copadapt/errors.hpp"
#include "copadapt/kde.hpp"

namespace copadapt::stats {

double mean(std::span<const double> x) {
    if (x.empty()) return 0.0;
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance(std::span<const double> x) {
    if (x.size() < 2) return 0.0;
    const double m = mean(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    return ss / static_cast<double>(x.size() - 1);
}

double sd(std::span<const double> x) {
    return std::sqrt(variance(x));
}

double quantile(std::span<const double> x, double p) {
    if (x.empty()) throw PreconditionError("quantile of an empty sample");
    std::vector<double> s(x.begin(), x.end());
    std::sort(s.begin(), s.end());
    const double h = (static_cast<double>(s.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, s.size() - 1);
    return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

namespace {

// Sorts `v` and returns the number of inversions.
std::uint64_t merge_count(std::vector<double>& v, std::vector<double>& buf, std::size_t lo, std::size_t hi) {
    if (hi - lo < 2) return 0;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::uint64_t swaps = merge_count(v, buf, lo, mid) + merge_count(v, buf, mid, hi);
    std::size_t i = lo, j = mid, k = lo;
    while (i < mid && j < hi) {
        if (v[j] < v[i]) {
            buf[k++] = v[j++];
            swaps += mid - i;
        } else {
            buf[k++] = v[i++];
        }
    }
    while (i < mid) buf[k++] = v[i++];
    while (j < hi) buf[k++] = v[j++];
    std::copy(buf.begin() + static_cast<std::ptrdiff_t>(lo), buf.begin() + static_cast<std::ptrdiff_t>(hi),
              v.begin() + static_cast<std::ptrdiff_t>(lo));
    return swaps;
}

std::uint64_t tied_pairs(const std::vector<double>& sorted) {
    std::uint64_t ties = 0, run = 1;
    for (std::size_t i = 1; i <= sorted.size(); ++i) {
        if (i < sorted.size() && sorted[i] == sorted[i - 1]) {
            ++run;
        } else {
            ties += run * (run - 1) / 2;
            run = 1;
        }
    }
    return ties;
}

std::vector<double> average_ranks(std::span<const double> x) {
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double kolmogorov_sf(double lambda) {
    if (lambda < 1e-3) return 1.0;
    double s = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        s += (k % 2 == 1 ? 2.0 : -2.0) * term;
        if (term < 1e-16) break;
    }
    return std::clamp(s, 0.0, 1.0);
}

}  // namespace

double kendall_tau(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("kendall_tau: samples differ in length");
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return x[a] < x[b] || (x[a] == x[b] && y[a] < y[b]);
    });
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = x[idx[i]];
        ys[i] = y[idx[i]];
    }
    const std::uint64_t n0 = static_cast<std::uint64_t>(n) * (n - 1) / 2;
    const std::uint64_t tx = tied_pairs(xs);
    std::uint64_t txy = 0, run = 1;
    for (std::size_t i = 1; i <= n; ++i) {
        if (i < n && xs[i] == xs[i - 1] && ys[i] == ys[i - 1]) {
            ++run;
        } else {
            txy += run * (run - 1) / 2;
            run = 1;
        }
    }
    std::vector<double> buf(n);
    const std::uint64_t swaps = merge_count(ys, buf, 0, n);
    const std::uint64_t ty = tied_pairs(ys);
    const double num = static_cast<double>(n0) - static_cast<double>(tx) - static_cast<double>(ty) +
                       static_cast<double>(txy) - 2.0 * static_cast<double>(swaps);
    const double den = std::sqrt(static_cast<double>(n0 - tx) * static_cast<double>(n0 - ty));
    return den > 0.0 ? num / den : 0.0;
}

double spearman_rho(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ShapeError("spearman_rho: samples differ in length");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double mx = mean(rx), my = mean(ry);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return (sxx > 0.0 && syy > 0.0) ? sxy / std::sqrt(sxx * syy) : 0.0;
}

KsResult ks_uniform(std::span<const double> u) {
    if (u.empty()) throw PreconditionError("ks_uniform: empty sample");
    std::vector<double> s(u.begin(), u.end());
    std::sort(s.begin(), s.end());
    const auto n = static_cast<double>(s.size());
    double d = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double f = std::clamp(s[i], 0.0, 1.0);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    const double sq = std::sqrt(n);
    return {d, kolmogorov_sf((sq + 0.12 + 0.11 / sq) * d)};
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw PreconditionError("ks_two_sample: empty sample");
    std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    const auto n = static_cast<double>(x.size());
    const auto m = static_cast<double>(y.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < x.size() && j < y.size()) {
        const double v = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= v) ++i;
        while (j < y.size() && y[j] <= v) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    const double ne = std::sqrt(n * m / (n + m));
    return {d, kolmogorov_sf((ne + 0.12 + 0.11 / ne) * d)};
}

double effective_sample_size(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 4) return static_cast<double>(n);
    const double m = mean(chain);
    double c0 = 0.0;
    for (double v : chain) c0 += (v - m) * (v - m);
    c0 /= static_cast<double>(n);
    if (!(c0 > 0.0)) return static_cast<double>(n);
    auto rho = [&](std::size_t lag) {
        double c = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) c += (chain[t] - m) * (chain[t + lag] - m);
        return c / static_cast<double>(n) / c0;
    };
    double sum = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        double pair = rho(2 * k) + rho(2 * k + 1);
        if (pair <= 0.0) break;
        pair = std::min(pair, prev_pair);
        sum += pair;
        prev_pair = pair;
    }
    const double tau = std::max(1.0, 2.0 * sum - 1.0);
    return static_cast<double>(n) / tau;
}

double kde_mode(std::span<const double> draws) {
    if (draws.empty()) throw PreconditionError("kde_mode: no draws");
    const Kde1d kde(std::vector<double>(draws.begin(), draws.end()));
    const auto [lo_it, hi_it] = std::minmax_element(draws.begin(), draws.end());
    const double lo = *lo_it, hi = *hi_it;
    if (!(hi > lo)) return lo;
    constexpr int kGrid = 2048;
    const double step = (hi - lo) / kGrid;
    double best_x = lo, best = -1.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double x = lo + step * i;
        const double f = kde.pdf(x);
        if (f > best * (1.0 + 1e-9)) {
            best = f;
            best_x = x;
        }
    }
    // Golden-section refinement within one grid cell either side.
    double a = std::max(lo, best_x - step), b = std::min(hi, best_x + step);
    constexpr double g = 0.6180339887498949;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = kde.pdf(c), fd = kde.pdf(d);
    for (int it = 0; it < 60; ++it) {
        if (fc >= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = kde.pdf(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = kde.pdf(d);
        }
    }
    const double refined = 0.5 * (a + b);
    return kde.pdf(refined) >= best ? refined : best_x;
}

}  // namespace copadapt::stats
