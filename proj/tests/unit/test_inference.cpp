#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "copadapt/errors.hpp"
#include "copadapt/inference.hpp"
#include "copadapt/simgen.hpp"
#include "copadapt/stats.hpp"

using namespace copadapt;

namespace {

McmcConfig quick_mcmc(std::uint64_t seed) {
    McmcConfig c;
    c.chains = 2;
    c.chain_length = 4000;
    c.burn_in = 2000;
    c.thinning = 4;
    c.seed = seed;
    return c;
}

IfmConfig quick_ifm(const std::vector<BiomarkerReading>& data, CopulaFamily family, std::uint64_t seed) {
    IfmConfig cfg;
    cfg.priors = default_priors(data, MarginalFamily::Gaussian, MarginalFamily::GaussMixture, 3, family);
    cfg.marginal_mcmc = quick_mcmc(seed);
    cfg.copula.burn_in = 150;
    cfg.copula.steps = 150;
    cfg.pilot_length = 1000;
    cfg.max_rows = 150;
    cfg.seed = seed;
    return cfg;
}

std::vector<double> column_of(const MarginalPosterior& p, auto f) {
    std::vector<double> out;
    for (const auto& d : p.draws) out.push_back(f(d));
    return out;
}

}  // namespace

TEST_CASE("gaussian marginal posterior recovers the generating law") {
    const auto data = generate_control(500, ScenarioParams{}, 31);
    const auto hgb = MarkerData::from_readings(data, Marker::Hgb);
    const auto priors = default_priors(data, MarginalFamily::Gaussian, MarginalFamily::Gaussian, 1,
                                       CopulaFamily::Independence);
    const auto post = fit_marginal_posterior(hgb, priors.hgb, quick_mcmc(1));
    CHECK(post.size() == 1000);
    const auto mu = column_of(post, [](const MarginalModel& m) { return m.components[0].mean; });
    const auto sigma = column_of(post, [](const MarginalModel& m) { return m.components[0].sd; });
    CHECK(std::abs(stats::kde_mode(mu) - 15.77) < 0.15);
    CHECK(std::abs(stats::mean(sigma) - 0.76) < 0.08);
    // Posterior sd of the mean is about sigma / sqrt(n).
    CHECK(stats::sd(mu) == doctest::Approx(0.76 / std::sqrt(500.0)).epsilon(0.3));
}

TEST_CASE("marginal posterior edge cases") {
    const auto priors = default_priors(generate_control(50, ScenarioParams{}, 2), MarginalFamily::Gaussian,
                                       MarginalFamily::Gaussian, 1, CopulaFamily::Independence);
    const auto one = fit_marginal_posterior(MarkerData::from_values({15.0}), priors.hgb, quick_mcmc(2));
    for (const auto& d : one.draws) REQUIRE(std::isfinite(d.components[0].mean));
    CHECK_THROWS_AS(fit_marginal_posterior(MarkerData::from_values({}), priors.hgb, quick_mcmc(2)),
                    PreconditionError);
    CHECK_THROWS_AS(fit_marginal_posterior(MarkerData::from_values({1.0, NAN}), priors.hgb, quick_mcmc(2)),
                    DomainError);
}

TEST_CASE("mixture draws are ordered by component mean") {
    const auto data = generate_control(400, ScenarioParams{}, 4);
    const auto priors = default_priors(data, MarginalFamily::Gaussian, MarginalFamily::GaussMixture, 3,
                                       CopulaFamily::SurvClayton);
    const auto post = fit_marginal_posterior(MarkerData::from_readings(data, Marker::Offs), priors.offs,
                                             quick_mcmc(5));
    for (const auto& d : post.draws) {
        REQUIRE(d.components.size() == 3);
        CHECK(d.components[0].mean <= d.components[1].mean);
        CHECK(d.components[1].mean <= d.components[2].mean);
        double w = 0;
        for (const auto& c : d.components) w += c.weight;
        CHECK(w == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pseudo observations under the true marginal are uniform") {
    const ScenarioParams truth;
    const auto data = generate_control(5000, truth, 6);
    const auto offs = MarkerData::from_readings(data, Marker::Offs);
    const auto col = pseudo_observations(truth.offs, offs);
    CHECK(col.clamps == 0);
    CHECK(stats::ks_uniform(col.u).p_value > 0.001);
    for (double u : col.u) REQUIRE((u >= kPitClamp && u <= 1.0 - kPitClamp));

    // Identical draws give identical columns.
    MarginalPosterior post;
    post.draws = {truth.offs, truth.offs};
    const auto pd = generate_pseudo_data(post, offs);
    REQUIRE(pd.columns.size() == 2);
    CHECK(pd.columns[0] == pd.columns[1]);
    CHECK(pd.columns[0] == col.u);

    // Extreme observations get clamped and counted.
    const auto far = pseudo_observations(MarginalModel::gaussian(0.0, 1.0), MarkerData::from_values({50.0, -50.0}));
    CHECK(far.clamps == 2);
}

TEST_CASE("copula theta from kendall tau") {
    CHECK(copula_theta_from_tau(CopulaFamily::SurvClayton, 0.4751) == doctest::Approx(1.81).epsilon(0.002));
    CHECK(copula_theta_from_tau(CopulaFamily::Gaussian, 0.5) == doctest::Approx(std::sin(M_PI / 4)).epsilon(1e-12));
    for (auto f : {CopulaFamily::Clayton, CopulaFamily::SurvClayton, CopulaFamily::Frank, CopulaFamily::Gaussian}) {
        const double t = copula_theta_from_tau(f, 0.3);
        CHECK(kendall_tau(CopulaModel{f, t}) == doctest::Approx(0.3).epsilon(1e-6));
        CHECK(theta_in_domain(f, copula_theta_from_tau(f, -0.2)));
    }
}

TEST_CASE("copula posterior on independent pseudo data stays near independence") {
    Rng rng(7);
    std::vector<double> u(1000), v(1000);
    for (std::size_t i = 0; i < u.size(); ++i) {
        u[i] = uniform01(rng);
        v[i] = uniform01(rng);
    }
    std::vector<double> rho;
    for (std::uint64_t s = 0; s < 20; ++s) {
        CopulaChainConfig c;
        c.seed = s;
        rho.push_back(
            fit_copula_posterior(u, v, CopulaFamily::Gaussian, copula_prior(CopulaFamily::Gaussian, 0.0, 1.0), c).theta);
    }
    CHECK(std::abs(stats::quantile(rho, 0.5)) < 0.1);
    CHECK_THROWS_AS(fit_copula_posterior(u, std::span<const double>(v).first(10), CopulaFamily::Gaussian,
                                         NormalPrior{}, CopulaChainConfig{}),
                    ShapeError);
}

TEST_CASE("copula posterior spread shrinks with more data") {
    const CopulaModel truth{CopulaFamily::SurvClayton, 1.81};
    auto spread = [&](std::size_t n) {
        const auto uv = copula_sample(truth, n, 8);
        std::vector<double> u, v, th;
        for (const auto& p : uv) {
            u.push_back(p.u);
            v.push_back(p.v);
        }
        for (std::uint64_t s = 0; s < 30; ++s) {
            CopulaChainConfig c;
            c.seed = 100 + s;
            th.push_back(fit_copula_posterior(u, v, truth.family, copula_prior(truth.family, 0.0, 10.0), c).theta);
        }
        return std::pair{stats::mean(th), stats::sd(th)};
    };
    const auto [m_small, sd_small] = spread(150);
    const auto [m_large, sd_large] = spread(1500);
    CHECK(sd_large < sd_small);
    CHECK(std::abs(m_large - 1.81) < 0.35);
}

TEST_CASE("two-stage fit on control data") {
    const auto data = generate_control(300, ScenarioParams{}, 9);
    const auto draws = bayesian_ifm(data, quick_ifm(data, CopulaFamily::SurvClayton, 10));
    CHECK_NOTHROW(validate(draws));
    CHECK(draws.size() == 150);
    CHECK(draws.copula_family == CopulaFamily::SurvClayton);
    CHECK(stats::mean(draws.theta) > 0.8);
    CHECK(stats::mean(draws.theta) < 3.0);
    for (double t : draws.theta) REQUIRE(t > 0.0);

    const auto table = parameter_table(draws);
    const std::vector<std::string> names{"mu_hgb",   "sigma_hgb",   "mu_offs_1",   "mu_offs_2",   "mu_offs_3",
                                         "sigma_offs_1", "sigma_offs_2", "sigma_offs_3", "w_offs_1", "w_offs_2",
                                         "w_offs_3", "theta_cop"};
    CHECK(table.names == names);
    for (const auto& col : table.columns) CHECK(col.size() == 150);

    const auto derived = derive_priors(draws);
    CHECK(derived.summary.size() == names.size());
    CHECK(derived.spec.copula_family == CopulaFamily::SurvClayton);
    CHECK(derived.spec.offs.weights.has_value());
    CHECK(derived.warnings.empty());
    CHECK(std::holds_alternative<HalfTPrior>(derived.spec.hgb.scales[0]));
    CHECK(std::get<HalfTPrior>(derived.spec.hgb.scales[0]).df == 15.0);
    CHECK(std::get<HalfTPrior>(derived.spec.offs.scales[1]).df == 2.0);

    // Same seed, same draws.
    const auto again = bayesian_ifm(data, quick_ifm(data, CopulaFamily::SurvClayton, 10));
    CHECK(again.theta == draws.theta);
}

TEST_CASE("independence framework gets a point-mass copula prior") {
    const auto data = generate_control(200, ScenarioParams{}, 11);
    const auto draws = bayesian_ifm(data, quick_ifm(data, CopulaFamily::Independence, 12));
    for (double t : draws.theta) CHECK(t == 0.0);
    const auto derived = derive_priors(draws);
    CHECK(std::holds_alternative<PointMassPrior>(derived.spec.copula));
}

TEST_CASE("derive_priors input checks") {
    PosteriorDraws d;
    d.copula_family = CopulaFamily::Gaussian;
    Rng rng(1);
    for (int i = 0; i < 50; ++i) {
        d.hgb.push_back(MarginalModel::gaussian(15 + 0.1 * standard_normal(rng), 0.8 + 0.01 * uniform01(rng)));
        d.offs.push_back(MarginalModel::gaussian(90 + standard_normal(rng), 5 + uniform01(rng)));
        d.theta.push_back(0.3 + 0.05 * standard_normal(rng));
    }
    const auto few = derive_priors(d);
    CHECK(few.warnings.size() == 1);

    auto flat = d;
    for (auto& t : flat.theta) t = 0.3;
    CHECK_THROWS_AS(derive_priors(flat), PreconditionError);

    CHECK_THROWS_AS(derive_priors(PosteriorDraws{}), PreconditionError);

    auto mixed = d;
    for (auto& m : mixed.offs)
        m = MarginalModel::mixture({{0.5, 80 + uniform01(rng), 3}, {0.5, 100 + uniform01(rng), 4 + uniform01(rng)}});
    for (auto& m : mixed.offs) m.components[0].sd += 0.1 * uniform01(rng);
    for (auto& m : mixed.offs) {
        const double w = 0.4 + 0.2 * uniform01(rng);
        m.components[0].weight = w;
        m.components[1].weight = 1 - w;
    }
    CHECK_THROWS_AS(derive_priors(mixed), ConfigError);
    DerivePriorsConfig two;
    two.weight_concentration = {1.0, 1.0};
    CHECK_NOTHROW(derive_priors(mixed, two));

    auto misaligned = d;
    misaligned.theta.pop_back();
    CHECK_THROWS_AS(validate(misaligned), ShapeError);
}
