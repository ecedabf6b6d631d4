#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "copadapt/inference.hpp"
#include "copadapt/joint.hpp"
#include "copadapt/priors.hpp"

namespace copadapt {

enum class PredictiveMode { Prior, Posterior };

std::string to_string(PredictiveMode mode);
PredictiveMode parse_predictive_mode(std::string_view name);

struct PredictiveSample {
    std::vector<double> hgb;
    std::vector<double> offs;
    PredictiveMode mode = PredictiveMode::Prior;
    std::string athlete_id;
    std::uint64_t seed = 0;
    // Set when posterior rows were bootstrapped rather than cycled.
    bool resampled = false;

    std::size_t size() const noexcept { return hgb.size(); }
    Point2 point(std::size_t i) const { return {hgb[i], offs[i]}; }
};

// Covariate rows for random-intercept marginals (empty otherwise).
struct PredictiveCovariates {
    std::vector<double> hgb;
    std::vector<double> offs;
};

// Prior predictive: every draw takes a fresh parameter configuration from
// the priors, one copula pair at its theta, and maps it through the
// marginal quantiles at its marginal parameters.
PredictiveSample predictive_sample(const PriorSpec& priors, std::size_t draws, std::uint64_t seed,
                                   const PredictiveCovariates& covariates = {});

// Posterior predictive: rows are cycled in order when draws <= M, and
// bootstrapped when draws > M (ConfigError if allow_resample is false).
PredictiveSample predictive_sample(const PosteriorDraws& posterior, std::size_t draws, std::uint64_t seed,
                                   bool allow_resample = true, const PredictiveCovariates& covariates = {});

// Athlete-specific posterior from the athlete's own readings under the
// population priors. Throws PreconditionError when there are no readings.
PosteriorDraws posterior_update_athlete(const PriorSpec& priors, std::span<const BiomarkerReading> readings,
                                        const IfmConfig& config);

}  // namespace copadapt
