#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "copadapt/random.hpp"

namespace copadapt {

enum class MarginalFamily { Gaussian, GaussMixture, RandomInterceptLM };

std::string to_string(MarginalFamily family);
MarginalFamily parse_marginal_family(std::string_view name);

struct MixtureComponent {
    double weight = 1.0;
    double mean = 0.0;
    double sd = 1.0;
};

// Parametric outcome law for one biomarker.
//
// Every family is stored as a list of normal components around a location
// shift. Gaussian is the single-component case; RandomInterceptLM is a
// single zero-mean component shifted by x'beta + b_i.
struct MarginalModel {
    MarginalFamily family = MarginalFamily::Gaussian;
    std::vector<MixtureComponent> components{MixtureComponent{}};
    std::vector<double> beta;  // RandomInterceptLM only

    static MarginalModel gaussian(double mean, double sd);
    static MarginalModel mixture(std::vector<MixtureComponent> components);
    static MarginalModel random_intercept(std::vector<double> beta, double sd);

    std::size_t num_components() const noexcept { return components.size(); }
    double mean(std::span<const double> covariates = {}, double athlete_effect = 0.0) const;
};

// Throws ParameterDomainError on non-positive sd, weights off the simplex,
// or an empty component list.
void validate(const MarginalModel& model);

// Location shift x'beta + b for RandomInterceptLM, zero otherwise. Throws
// ShapeError when covariates are supplied to a family without coefficients
// or their length disagrees with beta.
double location_shift(const MarginalModel& model, std::span<const double> covariates, double athlete_effect);

double marginal_pdf(const MarginalModel& model, double y, std::span<const double> covariates = {},
                    double athlete_effect = 0.0);
double marginal_log_pdf(const MarginalModel& model, double y, std::span<const double> covariates = {},
                        double athlete_effect = 0.0);
double marginal_cdf(const MarginalModel& model, double y, std::span<const double> covariates = {},
                    double athlete_effect = 0.0);
double marginal_quantile(const MarginalModel& model, double p, std::span<const double> covariates = {},
                         double athlete_effect = 0.0);

double marginal_draw(const MarginalModel& model, Rng& rng, double shift = 0.0);
std::vector<double> marginal_sample(const MarginalModel& model, std::size_t n, std::uint64_t seed,
                                   std::span<const double> covariates = {}, double athlete_effect = 0.0);

// Components reordered by increasing mean (label-switching fix-up).
void sort_components_by_mean(MarginalModel& model);

}  // namespace copadapt
