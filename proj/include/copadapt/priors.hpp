#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "copadapt/copulas.hpp"
#include "copadapt/marginals.hpp"
#include "copadapt/random.hpp"

namespace copadapt {

// Normal(mean, sd), optionally truncated to [lower, upper] and renormalised.
struct NormalPrior {
    double mean = 0.0;
    double sd = 1.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
};

// Student-t(df) with location/scale, truncated to (0, inf) and renormalised.
// With location 0 this is the usual half-t (law of |T| * scale).
struct HalfTPrior {
    double df = 3.0;
    double location = 0.0;
    double scale = 1.0;
};

struct DirichletPrior {
    std::vector<double> concentration;
};

struct LogNormalPrior {
    double logmean = 0.0;
    double logsd = 1.0;
};

// Degenerate prior; used to express "no parameter uncertainty".
struct PointMassPrior {
    double value = 0.0;
};

using Prior = std::variant<NormalPrior, HalfTPrior, DirichletPrior, LogNormalPrior, PointMassPrior>;

std::string prior_kind(const Prior& prior);

// Throws ParameterDomainError when hyperparameters are invalid.
void validate(const Prior& prior);

// Log density of a scalar prior; -inf outside the support.
double prior_logpdf(const Prior& prior, double value);
// Log density of a Dirichlet prior on the simplex; -inf off the simplex.
double prior_logpdf(const DirichletPrior& prior, std::span<const double> weights);

double prior_draw(const Prior& prior, Rng& rng);
std::vector<double> dirichlet_draw(const DirichletPrior& prior, Rng& rng);

// Priors for one biomarker's marginal parameters. `locations` holds one
// entry per mixture component (or per coefficient for RandomInterceptLM),
// `scales` one per component.
struct MarginalPrior {
    MarginalFamily family = MarginalFamily::Gaussian;
    std::vector<Prior> locations;
    std::vector<Prior> scales;
    std::optional<DirichletPrior> weights;
    // Point mass on the mixture weights; takes precedence over `weights`.
    std::vector<double> fixed_weights;
    // Prior on each athlete's random-intercept variance (RandomInterceptLM).
    std::optional<Prior> intercept_variance;

    std::size_t num_components() const;
};

void validate(const MarginalPrior& prior);

// Joint prior for (theta_hgb, theta_offs, theta_cop), independent blocks.
struct PriorSpec {
    MarginalPrior hgb;
    MarginalPrior offs;
    CopulaFamily copula_family = CopulaFamily::SurvClayton;
    Prior copula = NormalPrior{};
};

void validate(const PriorSpec& spec);

double marginal_prior_logpdf(const MarginalPrior& prior, const MarginalModel& model);
MarginalModel marginal_prior_draw(const MarginalPrior& prior, Rng& rng);

}  // namespace copadapt
