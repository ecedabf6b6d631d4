#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "copadapt/errors.hpp"
#include "copadapt/metrics.hpp"
#include "copadapt/simgen.hpp"

using namespace copadapt;

namespace {

ConfusionCounts counts(std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn) {
    ConfusionCounts c;
    c.tp = tp;
    c.fn = fn;
    c.fp = fp;
    c.tn = tn;
    return c;
}

double round3(double x) { return std::round(x * 1000.0) / 1000.0; }

}  // namespace

TEST_CASE("hand-worked confusion table") {
    const auto r = classification_metrics(counts(8, 2, 5, 85));
    CHECK(round3(*r.fnr) == 0.200);
    CHECK(*r.fpr == doctest::Approx(5.0 / 90.0));
    CHECK(round3(*r.fpr) == 0.056);
    CHECK(round3(*r.accuracy) == 0.930);
    CHECK(round3(*r.f1) == 1.656);
    CHECK(round3(*r.mcc) == 0.664);
    CHECK(*r.mcc == doctest::Approx(670.0 / std::sqrt(13.0 * 10.0 * 90.0 * 87.0)));
}

TEST_CASE("degenerate tables") {
    const auto perfect = classification_metrics(counts(10, 0, 0, 90));
    CHECK(*perfect.fnr == 0.0);
    CHECK(*perfect.fpr == 0.0);
    CHECK(*perfect.accuracy == 1.0);
    CHECK(*perfect.f1 == 2.0);
    CHECK(*perfect.mcc == 1.0);

    // No positives at all: FNR and MCC are undefined rather than NaN.
    const auto none = classification_metrics(counts(0, 0, 3, 97));
    CHECK_FALSE(none.fnr.has_value());
    CHECK_FALSE(none.mcc.has_value());
    CHECK(*none.f1 == doctest::Approx(2.0 * 97 / (2.0 * 97 + 3)));
    CHECK(*none.fpr == doctest::Approx(0.03));

    const auto empty = classification_metrics(ConfusionCounts{});
    CHECK_FALSE(empty.accuracy.has_value());
}

TEST_CASE("counts agree with a brute-force recount") {
    Rng rng(3);
    std::vector<std::uint8_t> truth(5000), flag(5000);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        truth[i] = uniform01(rng) < 0.1;
        flag[i] = uniform01(rng) < (truth[i] ? 0.7 : 0.05);
    }
    const auto c = confusion_counts(truth, flag);
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        tp += truth[i] && flag[i];
        fp += !truth[i] && flag[i];
        fn += truth[i] && !flag[i];
        tn += !truth[i] && !flag[i];
    }
    CHECK(c.tp == tp);
    CHECK(c.fp == fp);
    CHECK(c.fn == fn);
    CHECK(c.tn == tn);
    CHECK(c.tp + c.fp + c.fn + c.tn == truth.size());

    // Permuting points together leaves every count unchanged.
    std::vector<std::size_t> idx(truth.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = (i * 7919) % idx.size();
    std::vector<std::uint8_t> t2, f2;
    for (auto i : idx) {
        t2.push_back(truth[i]);
        f2.push_back(flag[i]);
    }
    const auto c2 = confusion_counts(t2, f2);
    CHECK(c2.tp == c.tp);
    CHECK(c2.tn == c.tn);

    const auto r = classification_metrics(c);
    CHECK(*r.accuracy == doctest::Approx(double(tp + tn) / truth.size()));
    CHECK(*r.fnr + double(tp) / (tp + fn) == doctest::Approx(1.0));
    CHECK(*r.f1 <= 2.0);
    CHECK(std::abs(*r.mcc) <= 1.0);

    CHECK_THROWS_AS(confusion_counts(truth, std::span<const std::uint8_t>(flag).first(10)), ShapeError);
}

TEST_CASE("literal counting mode") {
    const std::vector<std::uint8_t> truth{1, 1, 0, 0, 0};
    const std::vector<std::uint8_t> flag{1, 0, 1, 0, 0};
    const auto c = confusion_counts(truth, flag, MetricsMode::AppendixBLiteral);
    CHECK(c.tp == 2);
    CHECK(c.fn == 1);
    CHECK(c.tn == 3);
    CHECK(c.fp == 1);
    CHECK(c.tp + c.tn == truth.size());
    CHECK(parse_metrics_mode(to_string(MetricsMode::AppendixBLiteral)) == MetricsMode::AppendixBLiteral);
    CHECK(to_string(MetricsMode::Standard) == "standard");
    CHECK_THROWS_AS(parse_metrics_mode("loose"), ConfigError);
}

TEST_CASE("point-based counting") {
    const std::vector<Point2> pts{{0, 0}, {1, 1}, {2, 2}, {3, 3}};
    const auto c = confusion_counts(
        pts, [](const Point2& p) { return p[0] >= 2; }, [](const Point2& p) { return p[0] >= 1; });
    CHECK(c.tp == 2);
    CHECK(c.fn == 1);
    CHECK(c.tn == 1);
    CHECK(c.fp == 0);
}

TEST_CASE("true region oracle") {
    const JointModel normal{MarginalModel::gaussian(0, 1), MarginalModel::gaussian(0, 1),
                            CopulaModel{CopulaFamily::Independence, 0}};
    const double p = true_region_oracle(normal, 0.05, 100'000, 9);
    const double radius = std::sqrt(-2.0 * std::log(2.0 * M_PI * p));
    CHECK(radius == doctest::Approx(2.4477).epsilon(0.01));

    const ScenarioParams s;
    const auto model = s.joint();
    const double thr = true_region_oracle(model, 0.05, 100'000, 10);
    const auto fresh = model.sample(100'000, 11);
    std::size_t below = 0;
    for (const auto& q : fresh) below += model.density(q[0], q[1]) < thr;
    CHECK(double(below) / fresh.size() == doctest::Approx(0.05).epsilon(0.1));
    CHECK(std::abs(double(below) / fresh.size() - 0.05) < 0.005);

    CHECK(true_region_oracle(model, 0.05, 100'000, 10) == thr);
    CHECK_THROWS_AS(true_region_oracle(model, 0.05, 1000, 10), PreconditionError);
    CHECK_THROWS_AS(true_region_oracle(model, 1.5, 100'000, 10), PreconditionError);
}

TEST_CASE("metric columns") {
    MetricsReport r;
    r.fpr = 0.1;
    r.miscoverage_true_law = 0.2;
    CHECK(kMetricColumns.size() == 6);
    CHECK(*metric_value(r, "fpr") == 0.1);
    CHECK(*metric_value(r, "miscoverage_true_law") == 0.2);
    CHECK_FALSE(metric_value(r, "mcc").has_value());
    CHECK_THROWS_AS(metric_value(r, "auc"), ConfigError);
}
