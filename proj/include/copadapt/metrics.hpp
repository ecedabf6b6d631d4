#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "copadapt/joint.hpp"

namespace copadapt {

// Density threshold p_alpha of the true (1 - alpha) region: the empirical
// alpha-quantile of true-density values over n_mc draws from the true law.
// Points with density below it are the positives (atypical).
inline constexpr std::size_t kMinOracleDraws = 100'000;

double true_region_oracle(const JointModel& truth, double alpha, std::size_t n_mc, std::uint64_t seed);

enum class MetricsMode { Standard, AppendixBLiteral };

std::string to_string(MetricsMode mode);
MetricsMode parse_metrics_mode(std::string_view name);

// Positive = atypical (outside the region). In Standard mode the four
// counts partition the scored points. AppendixBLiteral counts TP and TN by
// truth alone, so TP + TN equals the number of scored points.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    MetricsMode mode = MetricsMode::Standard;
};

ConfusionCounts confusion_counts(std::span<const std::uint8_t> truly_atypical, std::span<const std::uint8_t> flagged,
                                 MetricsMode mode = MetricsMode::Standard);

ConfusionCounts confusion_counts(std::span<const Point2> points, const std::function<bool(const Point2&)>& flagged,
                                 const std::function<bool(const Point2&)>& truly_atypical,
                                 MetricsMode mode = MetricsMode::Standard);

// Ratios with a zero denominator are left empty instead of NaN.
struct MetricsReport {
    std::optional<double> fnr;
    std::optional<double> fpr;
    std::optional<double> accuracy;
    std::optional<double> f1;  // two-sided, in [0, 2]
    std::optional<double> mcc;
    std::optional<double> miscoverage;           // fraction of the predictive sample outside
    std::optional<double> miscoverage_true_law;  // fraction of true-law test points flagged
};

MetricsReport classification_metrics(const ConfusionCounts& counts);

// Column order used in tables: miscoverage, FPR, FNR, accuracy, F1, MCC.
inline const std::vector<std::string> kMetricColumns{"miscoverage", "fpr", "fnr", "accuracy", "f1", "mcc"};
std::optional<double> metric_value(const MetricsReport& report, std::string_view column);

}  // namespace copadapt
