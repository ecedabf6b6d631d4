#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "copadapt/errors.hpp"
#include "copadapt/simgen.hpp"
#include "copadapt/stats.hpp"

using namespace copadapt;

namespace {

std::pair<std::vector<double>, std::vector<double>> columns(const std::vector<BiomarkerReading>& r) {
    std::vector<double> h, o;
    for (const auto& x : r) {
        h.push_back(x.hgb);
        o.push_back(x.offs);
    }
    return {h, o};
}

}  // namespace

TEST_CASE("control data follow the scenario law") {
    const auto data = generate_control(100'000, ScenarioParams{}, 1);
    CHECK(data.size() == 100'000);
    CHECK(data.front().athlete_id == "c1");
    CHECK(data.back().athlete_id == "c100000");
    CHECK_NOTHROW(validate(std::span<const BiomarkerReading>(data)));
    const auto [h, o] = columns(data);
    CHECK(stats::mean(h) == doctest::Approx(15.77).epsilon(0.001));
    CHECK(stats::sd(h) == doctest::Approx(0.76).epsilon(0.01));
    CHECK(stats::mean(o) == doctest::Approx(92.9487).epsilon(0.001));
    CHECK(stats::kendall_tau(h, o) == doctest::Approx(0.4751).epsilon(0.02));
    CHECK(std::abs(stats::kendall_tau(h, o) - 0.4751) < 0.01);
    CHECK(generate_control(100, ScenarioParams{}, 1)[5].hgb == data[5].hgb);
}

TEST_CASE("independent scenario") {
    ScenarioParams s;
    s.copula = {CopulaFamily::Independence, 0.0};
    const auto [h, o] = columns(generate_control(20'000, s, 2));
    CHECK(std::abs(stats::kendall_tau(h, o)) < 0.015);
}

TEST_CASE("a million draws stay finite") {
    const auto pts = ScenarioParams{}.joint().sample(1'000'000, 3);
    std::size_t bad = 0;
    for (const auto& p : pts) bad += !(std::isfinite(p[0]) && std::isfinite(p[1]));
    CHECK(bad == 0);
}

TEST_CASE("resampling with noise") {
    const auto base = generate_control(50, ScenarioParams{}, 4);
    std::set<std::pair<double, double>> rows;
    for (const auto& r : base) rows.insert({r.hgb, r.offs});
    const auto exact = resample_with_noise(base, 500, 0.0, 0.0, 5);
    CHECK(exact.size() == 500);
    for (const auto& r : exact) CHECK(rows.count({r.hgb, r.offs}) == 1);

    const auto noisy = resample_with_noise(base, 20'000, 0.25, 3.0, 6);
    const auto [h, o] = columns(noisy);
    const auto [bh, bo] = columns(base);
    // Added noise inflates the variance by the noise variance.
    const double bvar = stats::variance(bh) * (base.size() - 1) / base.size();
    CHECK(stats::variance(h) == doctest::Approx(bvar + 0.0625).epsilon(0.06));
    CHECK(resample_with_noise(base, 10, 0.25, 3.0, 6)[3].hgb == noisy[3].hgb);
    CHECK_THROWS(resample_with_noise({}, 10, 0.25, 3.0, 6));
    CHECK_THROWS(resample_with_noise(base, 10, -1.0, 3.0, 6));
}

TEST_CASE("synthetic athlete") {
    const ScenarioParams s;
    const auto a = synthetic_athlete(s);
    REQUIRE(a.size() == 13);
    for (int j = 0; j < 13; ++j) {
        CHECK(a[j].occasion == j + 1);
        CHECK(a[j].athlete_id == "S1");
    }
    CHECK(marginal_cdf(s.hgb, a[10].hgb) == doctest::Approx(kOffRidgeHgbLevel).epsilon(1e-9));
    CHECK(marginal_cdf(s.offs, a[10].offs) == doctest::Approx(kOffRidgeOffsLevel).epsilon(1e-9));
    CHECK(marginal_cdf(s.hgb, a[0].hgb) == doctest::Approx(0.9999).epsilon(1e-9));
    // The off-ridge reading sits inside both marginal 99.9% ranges.
    CHECK(a[10].hgb < marginal_quantile(s.hgb, 0.9995));
    CHECK(a[10].offs > marginal_quantile(s.offs, 0.0005));
    CHECK_NOTHROW(validate(std::span<const BiomarkerReading>(a)));
}

TEST_CASE("generator input checks") {
    CHECK_THROWS_AS(generate_control(0, ScenarioParams{}, 1), PreconditionError);
    ScenarioParams bad;
    bad.copula = {CopulaFamily::SurvClayton, -1.0};
    CHECK_THROWS_AS(generate_control(10, bad, 1), ParameterDomainError);
    std::vector<BiomarkerReading> dup{{"a", 2, 15, 90, {}}, {"a", 1, 15, 90, {}}};
    CHECK_THROWS_AS(validate(std::span<const BiomarkerReading>(dup)), PreconditionError);
    std::vector<BiomarkerReading> inf{{"a", 1, INFINITY, 90, {}}};
    CHECK_THROWS_AS(validate(std::span<const BiomarkerReading>(inf)), DomainError);
}
