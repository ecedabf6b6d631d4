#pragma once

#include <span>
#include <vector>

namespace copadapt::stats {

double mean(std::span<const double> x);
// Sample standard deviation (n - 1 denominator); 0 for fewer than two values.
double sd(std::span<const double> x);
double variance(std::span<const double> x);

// Type-7 empirical quantile.
double quantile(std::span<const double> x, double p);

// Kendall tau-b in O(n log n) (Knight's merge-sort algorithm).
double kendall_tau(std::span<const double> x, std::span<const double> y);

// Spearman rank correlation (average ranks for ties).
double spearman_rho(std::span<const double> x, std::span<const double> y);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// One-sample KS test against U(0, 1).
KsResult ks_uniform(std::span<const double> u);
// Two-sample KS test.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

// Effective sample size of a single chain (Geyer's initial monotone sequence).
double effective_sample_size(std::span<const double> chain);

// Mode of a Gaussian KDE fitted to the draws (Silverman bandwidth), located
// on a fine grid and refined by golden-section search. Values within a
// relative 1e-9 of the maximum count as ties; the lowest is returned.
double kde_mode(std::span<const double> draws);

}  // namespace copadapt::stats
