#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "copadapt/joint.hpp"
#include "copadapt/predictive.hpp"

namespace copadapt {

enum class MeasureKind { TrueDensity, CopulaNonparametric, KernelDensity };

std::string to_string(MeasureKind kind);

// Any function whose ordering follows the target density's ordering.
// `dim` is 1 or 2; the evaluator reads that many coordinates.
struct ConcentrationMeasure {
    MeasureKind kind = MeasureKind::TrueDensity;
    std::size_t dim = 2;
    std::function<double(std::span<const double>)> evaluate;

    double operator()(double y) const { return evaluate(std::span<const double>(&y, 1)); }
    double operator()(double y1, double y2) const {
        const double p[2] = {y1, y2};
        return evaluate(std::span<const double>(p, 2));
    }
};

ConcentrationMeasure make_true_density_measure(const JointModel& model);
// 1D: the marginal density itself.
ConcentrationMeasure make_true_density_measure(const MarginalModel& model);

struct CopulaNpConfig {
    // Marginal KDE bandwidths; <= 0 selects Silverman's rule.
    double hgb_bandwidth = 0.0;
    double offs_bandwidth = 0.0;
    // Multiplier on the default copula-KDE bandwidth matrix.
    double copula_bandwidth_scale = 1.0;
};

inline constexpr std::size_t kMinNonparametricSample = 200;

// f1_hat(y1) f2_hat(y2) c_hat(F1_hat(y1), F2_hat(y2)) fitted to the sample.
ConcentrationMeasure make_copula_np_measure(std::span<const double> hgb, std::span<const double> offs,
                                            const CopulaNpConfig& config = {});
ConcentrationMeasure make_copula_np_measure(const PredictiveSample& sample, const CopulaNpConfig& config = {});

// 1D Gaussian KDE measure (bandwidth <= 0: Silverman).
ConcentrationMeasure make_kde_measure(std::span<const double> sample, double bandwidth = 0.0);

struct HprEstimate {
    double alpha = 0.05;
    double threshold = 0.0;
    std::size_t dim = 2;
    MeasureKind kind = MeasureKind::TrueDensity;
    // Measure value and membership for every sample point, in sample order.
    std::vector<double> values;
    std::vector<std::uint8_t> inside;

    std::size_t size() const noexcept { return values.size(); }
    std::size_t inside_count() const;
    double sample_miscoverage() const;
    // Membership of a point whose measure value is `value`.
    bool contains_value(double value) const noexcept { return value >= threshold; }
};

// Threshold at the floor(alpha m)-th order statistic (0-based) of the
// measure values; members are points with value >= threshold, so without
// ties exactly m - floor(alpha m) points are inside.
HprEstimate estimate_hpr_from_values(std::vector<double> values, double alpha, MeasureKind kind, std::size_t dim);

HprEstimate estimate_hpr(const PredictiveSample& sample, const ConcentrationMeasure& g, double alpha);
HprEstimate estimate_hpr(std::span<const Point2> sample, const ConcentrationMeasure& g, double alpha);
HprEstimate estimate_hpr(std::span<const double> sample, const ConcentrationMeasure& g, double alpha);

// Membership of new points (not part of the sample).
std::vector<std::uint8_t> hpr_contains(const HprEstimate& hpr, const ConcentrationMeasure& g,
                                       std::span<const Point2> points);

struct Interval {
    double lower = 0.0;
    double upper = 0.0;
};

// 1D highest-density region as a union of disjoint closed intervals. Each
// interval spans a maximal run of consecutive (sorted) sample points that
// are inside the 1D HPR.
struct UnivariateRegion {
    double alpha = 0.05;
    double threshold = 0.0;
    std::vector<Interval> intervals;
    // Fraction of the sample outside the region.
    double sample_miscoverage = 0.0;

    bool contains(double y) const;
};

UnivariateRegion univariate_region(std::span<const double> sample, const ConcentrationMeasure& g, double alpha);
// KDE measure with Silverman bandwidth.
UnivariateRegion univariate_region(std::span<const double> sample, double alpha);

// Atypical when outside at least one of the two marginal regions.
bool joint_flag_univariate(const Point2& point, const UnivariateRegion& hgb, const UnivariateRegion& offs);

}  // namespace copadapt
