#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "copadapt/copulas.hpp"
#include "copadapt/marginals.hpp"
#include "copadapt/mcmc.hpp"
#include "copadapt/priors.hpp"
#include "copadapt/readings.hpp"

namespace copadapt {

// Posterior draws for one biomarker's marginal parameters.
struct MarginalPosterior {
    std::vector<MarginalModel> draws;
    // RandomInterceptLM only: per draw, one intercept per athlete.
    std::vector<std::vector<double>> athlete_effects;
    double acceptance = 0.0;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return draws.size(); }
};

// Step 1 of the two-stage estimator. The family is taken from the prior.
// Mixture draws are relabelled so component means increase.
MarginalPosterior fit_marginal_posterior(const MarkerData& data, const MarginalPrior& prior,
                                         const McmcConfig& config);

// PIT values F(y_i | draw) for every observation, clamped into
// [1e-12, 1 - 1e-12]; `clamps` counts clamped entries.
struct PseudoColumn {
    std::vector<double> u;
    std::size_t clamps = 0;
};

inline constexpr double kPitClamp = 1e-12;

PseudoColumn pseudo_observations(const MarginalModel& draw, const MarkerData& data,
                                 std::span<const double> athlete_effects = {});

// All M columns at once; column m uses draw m only.
struct PseudoData {
    std::vector<std::vector<double>> columns;
    std::size_t clamps = 0;
};

PseudoData generate_pseudo_data(const MarginalPosterior& posterior, const MarkerData& data);

struct CopulaChainConfig {
    std::size_t burn_in = 500;
    std::size_t steps = 500;
    // NaN: start from the Kendall-tau inversion of the pseudo-data.
    double init = std::numeric_limits<double>::quiet_NaN();
    // Random-walk sd on the free scale.
    double proposal_scale = 0.2;
    bool adapt = true;
    std::uint64_t seed = 0;
};

// Random walk moves on log(theta) for Clayton, on the logit of the
// correlation for Gaussian and on theta itself for Frank.
ParamTransform copula_transform(CopulaFamily family);

// Moment estimate of theta from the sample Kendall tau of the pairs,
// pushed inside the family's domain.
double copula_theta_from_tau(CopulaFamily family, double tau);

struct CopulaFit {
    double theta = 0.0;
    double acceptance = 0.0;
};

// Step 2 for one row: runs burn_in + steps random-walk iterations on
// sum log c(u_i, v_i | theta) + log prior and returns the final state.
CopulaFit fit_copula_posterior(std::span<const double> u, std::span<const double> v, CopulaFamily family,
                               const Prior& prior, const CopulaChainConfig& config);

// Aligned joint posterior draws: row m holds (hgb[m], offs[m], theta[m]).
struct PosteriorDraws {
    std::vector<MarginalModel> hgb;
    std::vector<MarginalModel> offs;
    std::vector<std::vector<double>> hgb_effects;
    std::vector<std::vector<double>> offs_effects;
    CopulaFamily copula_family = CopulaFamily::SurvClayton;
    std::vector<double> theta;

    std::size_t clamp_count = 0;
    double marginal_acceptance = 0.0;
    double copula_acceptance = 0.0;
    // Effective sample size of the pooled theta column.
    double theta_ess = 0.0;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return theta.size(); }
    CopulaModel copula(std::size_t m) const { return {copula_family, theta[m]}; }
};

// Throws ShapeError on misaligned rows, ParameterDomainError on invalid rows.
void validate(const PosteriorDraws& draws);

struct IfmConfig {
    PriorSpec priors;
    McmcConfig marginal_mcmc;
    CopulaChainConfig copula;
    // Length of the single Step-2 chain run at the posterior-mean marginals
    // to pick the starting value and proposal scale of the per-row chains.
    std::size_t pilot_length = 4000;
    // Keep at most this many evenly spaced Step-1 rows (0 keeps all).
    std::size_t max_rows = 0;
    unsigned threads = 1;
    std::uint64_t seed = 0;
};

// Algorithm: Step 1 per marker, pseudo-data per row, Step 2 per row.
PosteriorDraws bayesian_ifm(std::span<const BiomarkerReading> readings, const IfmConfig& config);

// Step 2 only, given Step-1 posteriors (rows must align).
PosteriorDraws bayesian_ifm_copula_stage(std::span<const BiomarkerReading> readings, const MarginalPosterior& hgb,
                                         const MarginalPosterior& offs, const IfmConfig& config);

// Weakly informative priors scaled to the data: Normal(mean, 10 sd) on
// locations, half-t(3, 0, 5 sd) on scales, Dirichlet(1, ..., 1) on weights
// and Normal(0, 10) on the copula parameter (truncated to its domain).
PriorSpec default_priors(std::span<const BiomarkerReading> readings, MarginalFamily hgb_family,
                         MarginalFamily offs_family, std::size_t offs_components, CopulaFamily copula_family);

// Normal(0, sd) prior on theta restricted to the family's domain; point mass
// at 0 for Independence.
Prior copula_prior(CopulaFamily family, double mean, double sd);

struct ParameterSummary {
    std::string name;
    double map = 0.0;
    double sd = 0.0;
};

// Named scalar parameter columns of the draws, in the CSV column order:
// mu_hgb, sigma_hgb, mu_offs_k, sigma_offs_k, w_offs_k, theta_cop.
// Single-component marginals drop the _k suffix; random-intercept models
// list beta_<marker>_j before the scale.
struct ParameterTable {
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns;
};
ParameterTable parameter_table(const PosteriorDraws& draws);

struct DerivePriorsConfig {
    std::vector<double> hgb_scale_df{15.0};
    std::vector<double> offs_scale_df{5.0, 2.0, 7.0};
    double default_scale_df = 5.0;
    std::vector<double> weight_concentration{5.0, 10.0, 6.0};
    // Prior on each athlete's intercept variance for random-intercept
    // marginals; historical data carry no information on it.
    Prior intercept_variance = HalfTPrior{3.0, 0.0, 1.0};
};

struct DerivedPriors {
    PriorSpec spec;
    std::vector<ParameterSummary> summary;
    std::vector<std::string> warnings;
};

// Summarises each parameter by (1D KDE mode, posterior sd) and maps it to
// a prior: Normal for locations and theta, half-t(df, MAP, SD) for scales,
// Dirichlet with configured concentrations for weights.
DerivedPriors derive_priors(const PosteriorDraws& draws, const DerivePriorsConfig& config = {});

}  // namespace copadapt
