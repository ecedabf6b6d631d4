#include "copadapt/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "copadapt/errors.hpp"

namespace copadapt {

double true_region_oracle(const JointModel& truth, double alpha, std::size_t n_mc, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw PreconditionError("alpha must lie in (0, 1)");
    if (n_mc < kMinOracleDraws)
        throw PreconditionError("true_region_oracle needs at least " + std::to_string(kMinOracleDraws) + " draws");
    const auto pts = truth.sample(n_mc, seed);
    std::vector<double> dens(n_mc);
    for (std::size_t i = 0; i < n_mc; ++i) dens[i] = truth.density(pts[i][0], pts[i][1]);
    const auto k = static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n_mc)));
    std::nth_element(dens.begin(), dens.begin() + static_cast<std::ptrdiff_t>(k), dens.end());
    return dens[k];
}

std::string to_string(MetricsMode mode) {
    return mode == MetricsMode::Standard ? "standard" : "appendix-b-literal";
}

MetricsMode parse_metrics_mode(std::string_view name) {
    if (name == "standard") return MetricsMode::Standard;
    if (name == "appendix-b-literal") return MetricsMode::AppendixBLiteral;
    throw ConfigError("unknown metrics mode '" + std::string(name) + "' (expected standard|appendix-b-literal)");
}

ConfusionCounts confusion_counts(std::span<const std::uint8_t> truth, std::span<const std::uint8_t> flagged,
                                 MetricsMode mode) {
    if (truth.size() != flagged.size()) throw ShapeError("confusion_counts: truth and decisions differ in length");
    ConfusionCounts c;
    c.mode = mode;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const bool pos = truth[i] != 0, flag = flagged[i] != 0;
        if (mode == MetricsMode::Standard) {
            if (pos && flag) ++c.tp;
            else if (pos) ++c.fn;
            else if (flag) ++c.fp;
            else ++c.tn;
        } else {
            if (pos) {
                ++c.tp;
                if (!flag) ++c.fn;
            } else {
                ++c.tn;
                if (flag) ++c.fp;
            }
        }
    }
    return c;
}

ConfusionCounts confusion_counts(std::span<const Point2> points, const std::function<bool(const Point2&)>& flagged,
                                 const std::function<bool(const Point2&)>& truly_atypical, MetricsMode mode) {
    std::vector<std::uint8_t> t(points.size()), f(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        t[i] = truly_atypical(points[i]) ? 1 : 0;
        f[i] = flagged(points[i]) ? 1 : 0;
    }
    return confusion_counts(t, f, mode);
}

namespace {
std::optional<double> ratio(double num, double den) {
    if (den == 0.0) return std::nullopt;
    return num / den;
}
}  // namespace

MetricsReport classification_metrics(const ConfusionCounts& c) {
    const auto tp = static_cast<double>(c.tp), fp = static_cast<double>(c.fp);
    const auto fn = static_cast<double>(c.fn), tn = static_cast<double>(c.tn);
    MetricsReport r;
    r.fnr = ratio(fn, fn + tp);
    r.fpr = ratio(fp, fp + tn);
    const auto err = ratio(fn + fp, fn + fp + tn + tp);
    if (err) r.accuracy = 1.0 - *err;
    const auto f1_pos = ratio(2.0 * tp, 2.0 * tp + fp + fn);
    const auto f1_neg = ratio(2.0 * tn, 2.0 * tn + fp + fn);
    if (f1_pos && f1_neg) r.f1 = *f1_pos + *f1_neg;
    const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (den > 0.0) r.mcc = (tp * tn - fp * fn) / std::sqrt(den);
    return r;
}

std::optional<double> metric_value(const MetricsReport& r, std::string_view column) {
    if (column == "miscoverage") return r.miscoverage;
    if (column == "miscoverage_true_law") return r.miscoverage_true_law;
    if (column == "fpr") return r.fpr;
    if (column == "fnr") return r.fnr;
    if (column == "accuracy") return r.accuracy;
    if (column == "f1") return r.f1;
    if (column == "mcc") return r.mcc;
    throw ConfigError("unknown metric column '" + std::string(column) + "'");
}

}  // namespace copadapt
