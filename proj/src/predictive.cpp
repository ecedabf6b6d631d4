#include "copadapt/predictive.hpp"

#include "copadapt/errors.hpp"

namespace copadapt {

std::string to_string(PredictiveMode mode) {
    return mode == PredictiveMode::Prior ? "prior-predictive" : "posterior-predictive";
}

PredictiveMode parse_predictive_mode(std::string_view name) {
    if (name == "prior" || name == "prior-predictive") return PredictiveMode::Prior;
    if (name == "posterior" || name == "posterior-predictive") return PredictiveMode::Posterior;
    throw ConfigError("unknown predictive mode '" + std::string(name) + "'");
}

namespace {

double quantile_at(const MarginalModel& m, double u, std::span<const double> x, double b) {
    if (m.family != MarginalFamily::RandomInterceptLM) return marginal_quantile(m, u);
    return marginal_quantile(m, u, x, b);
}

}  // namespace

PredictiveSample predictive_sample(const PriorSpec& priors, std::size_t draws, std::uint64_t seed,
                                   const PredictiveCovariates& covariates) {
    if (draws == 0) throw PreconditionError("predictive_sample: draws must be >= 1");
    validate(priors);
    PredictiveSample out;
    out.mode = PredictiveMode::Prior;
    out.seed = seed;
    out.hgb.resize(draws);
    out.offs.resize(draws);
    Rng rng(seed);
    const bool ri_h = priors.hgb.family == MarginalFamily::RandomInterceptLM;
    const bool ri_o = priors.offs.family == MarginalFamily::RandomInterceptLM;
    for (std::size_t i = 0; i < draws; ++i) {
        const auto mh = marginal_prior_draw(priors.hgb, rng);
        const auto mo = marginal_prior_draw(priors.offs, rng);
        const CopulaModel cop{priors.copula_family, prior_draw(priors.copula, rng)};
        // A new athlete's intercept comes from its variance prior.
        double bh = 0.0, bo = 0.0;
        if (ri_h) bh = std::sqrt(prior_draw(*priors.hgb.intercept_variance, rng)) * standard_normal(rng);
        if (ri_o) bo = std::sqrt(prior_draw(*priors.offs.intercept_variance, rng)) * standard_normal(rng);
        const auto uv = copula_draw(cop, rng);
        out.hgb[i] = quantile_at(mh, uv.u, covariates.hgb, bh);
        out.offs[i] = quantile_at(mo, uv.v, covariates.offs, bo);
    }
    return out;
}

PredictiveSample predictive_sample(const PosteriorDraws& posterior, std::size_t draws, std::uint64_t seed,
                                   bool allow_resample, const PredictiveCovariates& covariates) {
    if (draws == 0) throw PreconditionError("predictive_sample: draws must be >= 1");
    const std::size_t m = posterior.size();
    if (m == 0) throw PreconditionError("predictive_sample: posterior has no rows");
    if (draws > m && !allow_resample)
        throw ConfigError("predictive_sample: " + std::to_string(draws) + " draws requested but only " +
                          std::to_string(m) + " posterior rows and resampling is disabled");
    PredictiveSample out;
    out.mode = PredictiveMode::Posterior;
    out.seed = seed;
    out.resampled = draws > m;
    out.hgb.resize(draws);
    out.offs.resize(draws);
    Rng rng(seed);
    for (std::size_t i = 0; i < draws; ++i) {
        std::size_t r = i;
        if (out.resampled) r = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(m)) % m;
        const auto& mh = posterior.hgb[r];
        const auto& mo = posterior.offs[r];
        // Single-athlete fits carry one intercept per draw.
        const double bh = posterior.hgb_effects.empty() ? 0.0 : posterior.hgb_effects[r].front();
        const double bo = posterior.offs_effects.empty() ? 0.0 : posterior.offs_effects[r].front();
        const auto uv = copula_draw(posterior.copula(r), rng);
        out.hgb[i] = quantile_at(mh, uv.u, covariates.hgb, bh);
        out.offs[i] = quantile_at(mo, uv.v, covariates.offs, bo);
    }
    return out;
}

PosteriorDraws posterior_update_athlete(const PriorSpec& priors, std::span<const BiomarkerReading> readings,
                                        const IfmConfig& config) {
    if (readings.empty())
        throw PreconditionError("posterior_update_athlete: no readings for this athlete; use prior-predictive mode");
    for (const auto& r : readings)
        if (r.athlete_id != readings.front().athlete_id)
            throw PreconditionError("posterior_update_athlete: readings belong to more than one athlete");
    IfmConfig cfg = config;
    cfg.priors = priors;
    return bayesian_ifm(readings, cfg);
}

}  // namespace copadapt
