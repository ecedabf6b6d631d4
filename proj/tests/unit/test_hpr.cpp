#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "copadapt/errors.hpp"
#include "copadapt/hpr.hpp"
#include "copadapt/simgen.hpp"
#include "copadapt/stats.hpp"

using namespace copadapt;

namespace {

JointModel standard_bivariate() {
    return {MarginalModel::gaussian(0, 1), MarginalModel::gaussian(0, 1), CopulaModel{CopulaFamily::Independence, 0}};
}

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> x(n);
    for (auto& v : x) v = standard_normal(rng);
    return x;
}

}  // namespace

TEST_CASE("threshold order statistic and inside count") {
    Rng rng(1);
    for (std::size_t m : {100u, 1000u, 10'000u, 12'345u}) {
        std::vector<double> v(m);
        for (auto& x : v) x = uniform01(rng);
        for (double alpha : {0.05, 0.01, 0.001}) {
            if (alpha * m < 1) continue;
            const auto h = estimate_hpr_from_values(v, alpha, MeasureKind::TrueDensity, 2);
            const auto cut = static_cast<std::size_t>(std::floor(alpha * m));
            CHECK(h.inside_count() == m - cut);
            CHECK(h.sample_miscoverage() == doctest::Approx(double(cut) / m).epsilon(1e-15));
            auto sorted = v;
            std::sort(sorted.begin(), sorted.end());
            CHECK(h.threshold == sorted[cut]);
        }
    }
    CHECK_THROWS_AS(estimate_hpr_from_values({1.0, 2.0}, 0.0, MeasureKind::TrueDensity, 2), PreconditionError);
    CHECK_THROWS_AS(estimate_hpr_from_values({1.0, 2.0}, 0.05, MeasureKind::TrueDensity, 2), PreconditionError);
    CHECK_THROWS_AS(estimate_hpr_from_values({1.0, NAN, 3.0, 4.0}, 0.5, MeasureKind::TrueDensity, 2), NumericalError);
}

TEST_CASE("bivariate normal region radius") {
    const auto model = standard_bivariate();
    const auto sample = model.sample(100'000, 2);
    const auto g = make_true_density_measure(model);
    const auto h = estimate_hpr(sample, g, 0.05);
    const double radius = std::sqrt(-2.0 * std::log(2.0 * M_PI * h.threshold));
    CHECK(radius == doctest::Approx(2.4477).epsilon(0.02));

    // Smaller alpha gives a superset.
    const auto wide = estimate_hpr(sample, g, 0.01);
    CHECK(wide.threshold <= h.threshold);
    for (std::size_t i = 0; i < sample.size(); ++i)
        if (h.inside[i]) REQUIRE(wide.inside[i]);

    // Order of the sample does not matter.
    auto shuffled = sample;
    std::reverse(shuffled.begin(), shuffled.end());
    CHECK(estimate_hpr(shuffled, g, 0.05).threshold == h.threshold);
}

TEST_CASE("true density measure") {
    const ScenarioParams s;
    const auto g = make_true_density_measure(s.joint());
    CHECK(g.dim == 2);
    CHECK(g(15.77, 92.13) == doctest::Approx(s.joint().density(15.77, 92.13)).epsilon(1e-14));
    CHECK(g(100.0, 92.13) == 0.0);
    const auto g1 = make_true_density_measure(s.hgb);
    CHECK(g1.dim == 1);
    CHECK(g1(15.77) == doctest::Approx(marginal_pdf(s.hgb, 15.77)));
}

TEST_CASE("copula-np measure tracks the true density") {
    const auto model = standard_bivariate();
    const auto sample = model.sample(5000, 3);
    std::vector<double> a, b;
    for (const auto& p : sample) {
        a.push_back(p[0]);
        b.push_back(p[1]);
    }
    const auto np = make_copula_np_measure(a, b);
    const auto truth = make_true_density_measure(model);
    const auto test = model.sample(4000, 4);
    std::vector<double> vn, vt;
    for (const auto& p : test) {
        vn.push_back(np(p[0], p[1]));
        vt.push_back(truth(p[0], p[1]));
    }
    CHECK(stats::spearman_rho(vn, vt) > 0.95);

    const auto hn = estimate_hpr(sample, np, 0.05);
    const auto ht = estimate_hpr(sample, truth, 0.05);
    std::size_t agree = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) agree += hn.inside[i] == ht.inside[i];
    CHECK(double(agree) / sample.size() >= 0.97);

    // Membership is invariant to positive affine maps of each coordinate.
    std::vector<double> a2(a), b2(b);
    for (auto& x : a2) x = 3.0 * x + 10.0;
    for (auto& x : b2) x = 0.5 * x - 4.0;
    const auto np2 = make_copula_np_measure(a2, b2);
    std::vector<Point2> moved;
    for (std::size_t i = 0; i < a2.size(); ++i) moved.push_back({a2[i], b2[i]});
    const auto h2 = estimate_hpr(moved, np2, 0.05);
    std::size_t same = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) same += hn.inside[i] == h2.inside[i];
    CHECK(double(same) / sample.size() >= 0.999);

    CHECK_THROWS_AS(make_copula_np_measure(std::span<const double>(a).first(199), std::span<const double>(b).first(199)),
                    PreconditionError);
    CHECK_THROWS_AS(make_copula_np_measure(std::span<const double>(a).first(300), std::span<const double>(b).first(299)),
                    ShapeError);
    CHECK_THROWS_AS(estimate_hpr(std::span<const double>(a), np, 0.05), ShapeError);
}

TEST_CASE("univariate regions") {
    const auto x = normals(100'000, 5);
    const auto r = univariate_region(x, 0.05);
    REQUIRE(r.intervals.size() == 1);
    CHECK(r.intervals[0].lower == doctest::Approx(-1.96).epsilon(0.03));
    CHECK(r.intervals[0].upper == doctest::Approx(1.96).epsilon(0.03));
    CHECK(r.sample_miscoverage == doctest::Approx(0.05).epsilon(0.01));
    CHECK(r.contains(0.0));
    CHECK_FALSE(r.contains(2.5));

    std::vector<double> bi;
    for (double v : normals(20'000, 6)) bi.push_back(v < 0 ? v - 6.0 : v + 6.0);
    const auto rb = univariate_region(bi, 0.05);
    CHECK(rb.intervals.size() == 2);
    CHECK_FALSE(rb.contains(0.0));
}

TEST_CASE("or rule for univariate pairs") {
    UnivariateRegion a, b;
    a.intervals = {{0.0, 1.0}};
    b.intervals = {{10.0, 11.0}, {12.0, 13.0}};
    CHECK_FALSE(joint_flag_univariate({0.5, 10.5}, a, b));
    CHECK_FALSE(joint_flag_univariate({0.5, 12.5}, a, b));
    CHECK(joint_flag_univariate({0.5, 11.5}, a, b));
    CHECK(joint_flag_univariate({1.5, 10.5}, a, b));
    CHECK(joint_flag_univariate({1.5, 11.5}, a, b));
}

TEST_CASE("marginal regions under independence and dependence") {
    // With independent markers the OR rule misses 1 - (1 - alpha)^2 of the sample.
    ScenarioParams s;
    s.copula = {CopulaFamily::Independence, 0.0};
    const auto indep = s.joint().sample(20'000, 7);
    std::vector<double> h, o;
    for (const auto& p : indep) {
        h.push_back(p[0]);
        o.push_back(p[1]);
    }
    const auto rh = univariate_region(h, 0.05);
    const auto ro = univariate_region(o, 0.05);
    std::size_t out = 0;
    for (const auto& p : indep) out += joint_flag_univariate(p, rh, ro);
    CHECK(double(out) / indep.size() == doctest::Approx(0.0975).epsilon(0.05));

    // Positive dependence makes the two tails overlap, so fewer points are flagged.
    const auto dep = ScenarioParams{}.joint().sample(20'000, 8);
    out = 0;
    for (const auto& p : dep) out += joint_flag_univariate(p, rh, ro);
    const double miss = double(out) / dep.size();
    CHECK(miss > 0.05);
    CHECK(miss < 0.09);
}
