#include <doctest.h>

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "copadapt/copulas.hpp"
#include "copadapt/errors.hpp"
#include "copadapt/stats.hpp"

using namespace copadapt;

namespace {

std::vector<CopulaModel> families_at(double theta) {
    return {{CopulaFamily::Clayton, theta},
            {CopulaFamily::SurvClayton, theta},
            {CopulaFamily::Frank, theta},
            {CopulaFamily::Gaussian, std::tanh(theta / 3.0)},
            {CopulaFamily::Independence, 0.0}};
}

double mixed_difference(const CopulaModel& m, double u, double v, double h) {
    return (copula_cdf(m, u + h, v + h) - copula_cdf(m, u + h, v - h) - copula_cdf(m, u - h, v + h) +
            copula_cdf(m, u - h, v - h)) /
           (4.0 * h * h);
}

// Frank tau through the Debye function, by adaptive quadrature.
double frank_tau_oracle(double theta) {
    auto f = [](double t) { return t == 0.0 ? 1.0 : t / std::expm1(t); };
    const double d1 = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, theta, 10, 1e-14) / theta;
    return 1.0 - 4.0 / theta * (1.0 - d1);
}

}  // namespace

TEST_CASE("cdf boundary conditions") {
    for (const auto& m : families_at(1.81)) {
        for (double u = 0.0; u <= 1.0; u += 0.125) {
            CHECK(copula_cdf(m, u, 1.0) == doctest::Approx(u).epsilon(1e-12));
            CHECK(copula_cdf(m, 1.0, u) == doctest::Approx(u).epsilon(1e-12));
            CHECK(copula_cdf(m, u, 0.0) == doctest::Approx(0.0));
            CHECK(copula_cdf(m, 0.0, u) == doctest::Approx(0.0));
        }
    }
}

TEST_CASE("frank near zero reduces to independence") {
    const CopulaModel m{CopulaFamily::Frank, 1e-8};
    CHECK(copula_cdf(m, 0.3, 0.7) == doctest::Approx(0.21).epsilon(1e-7));
    CHECK(copula_pdf(m, 0.3, 0.7) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK_THROWS_AS(validate(CopulaModel{CopulaFamily::Frank, 0.0}), ParameterDomainError);
}

TEST_CASE("clayton cdf against closed form and integrated density") {
    const CopulaModel m{CopulaFamily::Clayton, 1.81};
    const double closed = std::pow(2.0 * std::pow(0.5, -1.81) - 1.0, -1.0 / 1.81);
    CHECK(closed == doctest::Approx(0.3712).epsilon(1e-4));
    CHECK(copula_cdf(m, 0.5, 0.5) == doctest::Approx(closed).epsilon(1e-12));

    // The strips below eps carry at most 2 eps of mass.
    const double eps = 1e-9;
    boost::math::quadrature::tanh_sinh<double> ts;
    auto inner = [&](double u) { return ts.integrate([&](double v) { return copula_pdf(m, u, v); }, eps, 0.5, 1e-12); };
    const double integral = ts.integrate(inner, eps, 0.5, 1e-10);
    CHECK(integral == doctest::Approx(closed).epsilon(1e-6));
}

TEST_CASE("independence density is one") {
    const CopulaModel m{CopulaFamily::Independence, 0.0};
    CHECK(copula_pdf(m, 0.1, 0.9) == 1.0);
    CHECK(copula_pdf(m, 0.5, 0.5) == 1.0);
    CHECK(copula_cdf(m, 0.3, 0.7) == doctest::Approx(0.21));
}

TEST_CASE("survival clayton reflection is exact on a grid") {
    const CopulaModel s{CopulaFamily::SurvClayton, 1.81};
    const CopulaModel c{CopulaFamily::Clayton, 1.81};
    // 1 - 0.9 is not the double nearest 0.1, so this one is checked to rounding.
    CHECK(copula_pdf(s, 0.2, 0.9) == doctest::Approx(copula_pdf(c, 0.8, 0.1)).epsilon(1e-13));
    for (int i = 1; i <= 50; ++i) {
        for (int j = 1; j <= 50; ++j) {
            const double u = i / 51.0, v = j / 51.0;
            REQUIRE(copula_pdf(s, u, v) == copula_pdf(c, 1.0 - u, 1.0 - v));
        }
    }
}

TEST_CASE("density matches mixed finite difference of the cdf") {
    for (double theta : {0.5, 1.81, 5.0}) {
        for (const auto& m : families_at(theta)) {
            for (auto [u, v] : {std::pair{0.5, 0.5}, std::pair{0.3, 0.6}, std::pair{0.8, 0.2}}) {
                const double fd = mixed_difference(m, u, v, 1e-4);
                CAPTURE(to_string(m.family));
                CAPTURE(theta);
                CHECK(copula_pdf(m, u, v) == doctest::Approx(fd).epsilon(1e-4));
            }
        }
    }
}

TEST_CASE("log density agrees with density") {
    for (const auto& m : families_at(1.81))
        CHECK(copula_log_pdf(m, 0.3, 0.8) == doctest::Approx(std::log(copula_pdf(m, 0.3, 0.8))).epsilon(1e-12));
}

TEST_CASE("frechet bounds and 2-increasing on a grid") {
    for (double theta : {0.5, 1.81, 5.0}) {
        for (const auto& m : families_at(theta)) {
            for (int i = 0; i <= 20; ++i) {
                for (int j = 0; j <= 20; ++j) {
                    const double u = i / 20.0, v = j / 20.0;
                    const double c = copula_cdf(m, u, v);
                    REQUIRE(c >= std::max(u + v - 1.0, 0.0) - 1e-12);
                    REQUIRE(c <= std::min(u, v) + 1e-12);
                    if (i > 0 && j > 0) {
                        const double du = 1.0 / 20.0;
                        const double vol = c - copula_cdf(m, u - du, v) - copula_cdf(m, u, v - du) +
                                           copula_cdf(m, u - du, v - du);
                        REQUIRE(vol >= -1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("density integrates to one") {
    // Midpoint rule on a 1000 x 1000 grid.
    const int k = 1000;
    for (double theta : {0.5, 1.81, 5.0}) {
        for (const auto& m : families_at(theta)) {
            double s = 0.0;
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) s += copula_pdf(m, (i + 0.5) / k, (j + 0.5) / k);
            CAPTURE(to_string(m.family));
            CAPTURE(theta);
            CHECK(s / (k * static_cast<double>(k)) == doctest::Approx(1.0).epsilon(0.01));
        }
    }
}

TEST_CASE("kendall tau closed forms") {
    CHECK(kendall_tau({CopulaFamily::Independence, 0.0}) == 0.0);
    CHECK(kendall_tau({CopulaFamily::Clayton, 1.81}) == doctest::Approx(1.81 / 3.81));
    CHECK(kendall_tau({CopulaFamily::Clayton, 1.81}) == doctest::Approx(0.4751).epsilon(1e-4));
    CHECK(kendall_tau({CopulaFamily::SurvClayton, 1.81}) == doctest::Approx(0.4751).epsilon(1e-4));
    CHECK(kendall_tau({CopulaFamily::Gaussian, 0.5}) == doctest::Approx(2.0 / M_PI * std::asin(0.5)));
    CHECK(kendall_tau({CopulaFamily::Gaussian, 1.0 - 1e-12}) > 0.9999);
    for (double theta : {-4.0, 0.5, 1.81, 5.0, 20.0})
        CHECK(kendall_tau({CopulaFamily::Frank, theta}) == doctest::Approx(frank_tau_oracle(theta)).epsilon(1e-8));
}

TEST_CASE("sampled kendall tau matches the model") {
    for (const auto& m : families_at(1.81)) {
        const auto s = copula_sample(m, 100'000, 42);
        std::vector<double> u, v;
        for (const auto& p : s) {
            u.push_back(p.u);
            v.push_back(p.v);
        }
        CAPTURE(to_string(m.family));
        CHECK(std::abs(stats::kendall_tau(u, v) - kendall_tau(m)) < 0.01);
    }
}

TEST_CASE("sampled margins are uniform") {
    const auto s = copula_sample({CopulaFamily::SurvClayton, 1.81}, 100'000, 7);
    std::vector<double> u, v;
    for (const auto& p : s) {
        REQUIRE(p.u > 0.0);
        REQUIRE(p.u < 1.0);
        u.push_back(p.u);
        v.push_back(p.v);
    }
    CHECK(stats::ks_uniform(u).p_value > 0.01);
    CHECK(stats::ks_uniform(v).p_value > 0.01);
}

TEST_CASE("empirical copula matches the cdf") {
    for (const auto& m : families_at(1.81)) {
        const auto s = copula_sample(m, 100'000, 11);
        double worst = 0.0;
        for (int i = 1; i <= 10; ++i) {
            for (int j = 1; j <= 10; ++j) {
                const double a = i / 11.0, b = j / 11.0;
                std::size_t cnt = 0;
                for (const auto& p : s) cnt += (p.u <= a && p.v <= b);
                worst = std::max(worst, std::abs(cnt / 1e5 - copula_cdf(m, a, b)));
            }
        }
        CAPTURE(to_string(m.family));
        CHECK(worst < 0.01);
    }
}

TEST_CASE("sampling is reproducible") {
    const CopulaModel m{CopulaFamily::Frank, 3.0};
    const auto a = copula_sample(m, 1000, 5);
    const auto b = copula_sample(m, 1000, 5);
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].u == b[i].u);
        REQUIRE(a[i].v == b[i].v);
    }
}

TEST_CASE("conditional cdf is the derivative of the cdf in u") {
    for (const auto& m : families_at(1.81)) {
        const double h = 1e-6;
        const double fd = (copula_cdf(m, 0.4 + h, 0.7) - copula_cdf(m, 0.4 - h, 0.7)) / (2 * h);
        CHECK(copula_conditional_cdf(m, 0.4, 0.7) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(validate(CopulaModel{CopulaFamily::Clayton, -0.5}), ParameterDomainError);
    CHECK_THROWS_AS(validate(CopulaModel{CopulaFamily::Gaussian, 1.0}), ParameterDomainError);
    CHECK_THROWS_AS(copula_cdf({CopulaFamily::Clayton, -1.0}, 0.5, 0.5), ParameterDomainError);
    CHECK_THROWS_AS(copula_cdf({CopulaFamily::Clayton, 1.0}, 1.5, 0.5), DomainError);
    CHECK_THROWS_AS(copula_pdf({CopulaFamily::Clayton, 1.0}, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(copula_pdf({CopulaFamily::Frank, 2.0}, 0.5, 1.0), DomainError);
}

TEST_CASE("log likelihood helper equals summed log densities") {
    const CopulaModel m{CopulaFamily::SurvClayton, 1.81};
    const auto s = copula_sample(m, 500, 3);
    std::vector<double> u, v;
    for (const auto& p : s) {
        u.push_back(p.u);
        v.push_back(p.v);
    }
    for (auto fam : {CopulaFamily::Clayton, CopulaFamily::SurvClayton, CopulaFamily::Frank, CopulaFamily::Gaussian}) {
        const CopulaLogLikelihood ll(fam, u, v);
        const double theta = fam == CopulaFamily::Gaussian ? 0.4 : 1.3;
        double direct = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) direct += copula_log_pdf({fam, theta}, u[i], v[i]);
        CHECK(ll(theta) == doctest::Approx(direct).epsilon(1e-10));
    }
    CHECK(std::isinf(CopulaLogLikelihood(CopulaFamily::Clayton, u, v)(-1.0)));
}

TEST_CASE("family names round trip") {
    for (auto f : {CopulaFamily::Clayton, CopulaFamily::SurvClayton, CopulaFamily::Frank, CopulaFamily::Gaussian,
                   CopulaFamily::Independence})
        CHECK(parse_copula_family(to_string(f)) == f);
}
