#include "copadapt/hpr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "copadapt/errors.hpp"
#include "copadapt/kde.hpp"
#include "copadapt/stats.hpp"

namespace copadapt {

std::string to_string(MeasureKind kind) {
    switch (kind) {
        case MeasureKind::TrueDensity: return "true-density";
        case MeasureKind::CopulaNonparametric: return "copula-nonparametric";
        case MeasureKind::KernelDensity: return "kernel-density";
    }
    return "unknown";
}

ConcentrationMeasure make_true_density_measure(const JointModel& model) {
    validate(model);
    ConcentrationMeasure g;
    g.kind = MeasureKind::TrueDensity;
    g.dim = 2;
    g.evaluate = [model](std::span<const double> y) { return model.density(y[0], y[1]); };
    return g;
}

ConcentrationMeasure make_true_density_measure(const MarginalModel& model) {
    validate(model);
    ConcentrationMeasure g;
    g.kind = MeasureKind::TrueDensity;
    g.dim = 1;
    g.evaluate = [model](std::span<const double> y) { return marginal_pdf(model, y[0]); };
    return g;
}

namespace {

struct CopulaNpState {
    Kde1d f1, f2;
    std::unique_ptr<GaussianTransformCopulaKde> c;
    double lo, hi;

    CopulaNpState(std::span<const double> a, std::span<const double> b, const CopulaNpConfig& cfg)
        : f1(std::vector<double>(a.begin(), a.end()), cfg.hgb_bandwidth),
          f2(std::vector<double>(b.begin(), b.end()), cfg.offs_bandwidth) {
        const double n = static_cast<double>(a.size());
        lo = 0.5 / n;
        hi = 1.0 - 0.5 / n;
        std::vector<double> u(a.size()), v(b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            u[i] = std::clamp(f1.cdf(a[i]), lo, hi);
            v[i] = std::clamp(f2.cdf(b[i]), lo, hi);
        }
        c = std::make_unique<GaussianTransformCopulaKde>(u, v, cfg.copula_bandwidth_scale);
    }

    double operator()(double y1, double y2) const {
        const double d1 = f1.pdf(y1);
        if (!(d1 > 0.0)) return 0.0;
        const double d2 = f2.pdf(y2);
        if (!(d2 > 0.0)) return 0.0;
        // Outside the sample range the smoothed CDF can reach 0 or 1; the
        // clamp keeps the copula factor finite there.
        const double u = std::clamp(f1.cdf(y1), 1e-12, 1.0 - 1e-12);
        const double v = std::clamp(f2.cdf(y2), 1e-12, 1.0 - 1e-12);
        return d1 * d2 * c->pdf(u, v);
    }
};

}  // namespace

ConcentrationMeasure make_copula_np_measure(std::span<const double> hgb, std::span<const double> offs,
                                            const CopulaNpConfig& config) {
    if (hgb.size() != offs.size()) throw ShapeError("copula-np measure: coordinate vectors differ in length");
    if (hgb.size() < kMinNonparametricSample)
        throw PreconditionError("copula-np measure needs at least " + std::to_string(kMinNonparametricSample) +
                                " sample points, got " + std::to_string(hgb.size()));
    if (!(stats::sd(hgb) > 0.0) || !(stats::sd(offs) > 0.0))
        throw DomainError("copula-np measure: sample has zero variance in one coordinate");
    auto state = std::make_shared<const CopulaNpState>(hgb, offs, config);
    ConcentrationMeasure g;
    g.kind = MeasureKind::CopulaNonparametric;
    g.dim = 2;
    g.evaluate = [state](std::span<const double> y) { return (*state)(y[0], y[1]); };
    return g;
}

ConcentrationMeasure make_copula_np_measure(const PredictiveSample& sample, const CopulaNpConfig& config) {
    return make_copula_np_measure(sample.hgb, sample.offs, config);
}

ConcentrationMeasure make_kde_measure(std::span<const double> sample, double bandwidth) {
    auto kde = std::make_shared<const Kde1d>(std::vector<double>(sample.begin(), sample.end()), bandwidth);
    ConcentrationMeasure g;
    g.kind = MeasureKind::KernelDensity;
    g.dim = 1;
    g.evaluate = [kde](std::span<const double> y) { return kde->pdf(y[0]); };
    return g;
}

std::size_t HprEstimate::inside_count() const {
    return static_cast<std::size_t>(std::count(inside.begin(), inside.end(), std::uint8_t{1}));
}

double HprEstimate::sample_miscoverage() const {
    if (inside.empty()) return 0.0;
    return static_cast<double>(inside.size() - inside_count()) / static_cast<double>(inside.size());
}

HprEstimate estimate_hpr_from_values(std::vector<double> values, double alpha, MeasureKind kind, std::size_t dim) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("alpha must lie in (0, 1)");
    const std::size_t m = values.size();
    const auto k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(m)));
    if (k < 1)
        throw PreconditionError("HPR needs at least 1/alpha sample points (alpha=" + std::to_string(alpha) +
                                ", m=" + std::to_string(m) + ")");
    for (double v : values)
        if (std::isnan(v)) throw NumericalError("concentration measure returned NaN");
    std::vector<double> sorted = values;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
    HprEstimate h;
    h.alpha = alpha;
    h.threshold = sorted[k];
    h.dim = dim;
    h.kind = kind;
    h.inside.resize(m);
    for (std::size_t i = 0; i < m; ++i) h.inside[i] = values[i] >= h.threshold ? 1 : 0;
    h.values = std::move(values);
    return h;
}

HprEstimate estimate_hpr(std::span<const Point2> sample, const ConcentrationMeasure& g, double alpha) {
    if (g.dim != 2) throw ShapeError("estimate_hpr: 2D sample needs a 2D measure");
    std::vector<double> values(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) values[i] = g(sample[i][0], sample[i][1]);
    return estimate_hpr_from_values(std::move(values), alpha, g.kind, 2);
}

HprEstimate estimate_hpr(const PredictiveSample& sample, const ConcentrationMeasure& g, double alpha) {
    if (g.dim != 2) throw ShapeError("estimate_hpr: 2D sample needs a 2D measure");
    std::vector<double> values(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) values[i] = g(sample.hgb[i], sample.offs[i]);
    return estimate_hpr_from_values(std::move(values), alpha, g.kind, 2);
}

HprEstimate estimate_hpr(std::span<const double> sample, const ConcentrationMeasure& g, double alpha) {
    if (g.dim != 1) throw ShapeError("estimate_hpr: 1D sample needs a 1D measure");
    std::vector<double> values(sample.size());
    for (std::size_t i = 0; i < sample.size(); ++i) values[i] = g(sample[i]);
    return estimate_hpr_from_values(std::move(values), alpha, g.kind, 1);
}

std::vector<std::uint8_t> hpr_contains(const HprEstimate& hpr, const ConcentrationMeasure& g,
                                       std::span<const Point2> points) {
    if (g.dim != 2) throw ShapeError("hpr_contains: needs a 2D measure");
    std::vector<std::uint8_t> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = hpr.contains_value(g(points[i][0], points[i][1])) ? 1 : 0;
    return out;
}

bool UnivariateRegion::contains(double y) const {
    // Intervals are sorted and disjoint.
    auto it = std::upper_bound(intervals.begin(), intervals.end(), y,
                               [](double x, const Interval& iv) { return x < iv.lower; });
    if (it == intervals.begin()) return false;
    --it;
    return y <= it->upper;
}

UnivariateRegion univariate_region(std::span<const double> sample, const ConcentrationMeasure& g, double alpha) {
    const auto est = estimate_hpr(sample, g, alpha);
    std::vector<std::size_t> order(sample.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sample[a] < sample[b]; });
    UnivariateRegion r;
    r.alpha = alpha;
    r.threshold = est.threshold;
    r.sample_miscoverage = est.sample_miscoverage();
    bool open = false;
    for (std::size_t idx : order) {
        const double y = sample[idx];
        if (est.inside[idx]) {
            // Consecutive inside points can still straddle a low-density gap.
            const bool gap = open && y > r.intervals.back().upper && g(0.5 * (y + r.intervals.back().upper)) < est.threshold;
            if (!open || gap) {
                r.intervals.push_back({y, y});
                open = true;
            } else {
                r.intervals.back().upper = y;
            }
        } else if (open && y > r.intervals.back().upper) {
            open = false;
        }
    }
    return r;
}

UnivariateRegion univariate_region(std::span<const double> sample, double alpha) {
    return univariate_region(sample, make_kde_measure(sample), alpha);
}

bool joint_flag_univariate(const Point2& point, const UnivariateRegion& hgb, const UnivariateRegion& offs) {
    return !hgb.contains(point[0]) || !offs.contains(point[1]);
}

}  // namespace copadapt
