#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "copadapt/random.hpp"

namespace copadapt {

enum class CopulaFamily { Clayton, SurvClayton, Frank, Gaussian, Independence };

std::string to_string(CopulaFamily family);
CopulaFamily parse_copula_family(std::string_view name);

// Bivariate one-parameter copula. `theta` is the Clayton/Frank dependence
// parameter or the Gaussian correlation; ignored for Independence.
struct CopulaModel {
    CopulaFamily family = CopulaFamily::Independence;
    double theta = 0.0;
};

struct UnitPoint {
    double u = 0.5;
    double v = 0.5;
};

// Throws ParameterDomainError when theta is outside the family's domain:
// Clayton/SurvClayton theta > 0, Frank theta != 0 (|theta| < 1e-6 is
// treated as its independence limit), Gaussian theta in (-1, 1).
void validate(const CopulaModel& model);
bool theta_in_domain(CopulaFamily family, double theta) noexcept;

// Below this |theta| the Frank copula is evaluated through its
// first-order expansion around independence.
inline constexpr double kFrankIndependenceCutoff = 1e-6;

double copula_cdf(const CopulaModel& model, double u, double v);
double copula_pdf(const CopulaModel& model, double u, double v);
double copula_log_pdf(const CopulaModel& model, double u, double v);

// h-function: P(V <= v | U = u).
double copula_conditional_cdf(const CopulaModel& model, double u, double v);

UnitPoint copula_draw(const CopulaModel& model, Rng& rng);
std::vector<UnitPoint> copula_sample(const CopulaModel& model, std::size_t n, std::uint64_t seed);

double kendall_tau(const CopulaModel& model);

// Sum of log copula densities over fixed pseudo-observations, with the
// per-point transforms that do not depend on theta hoisted out of the
// MCMC loop.
class CopulaLogLikelihood {
public:
    CopulaLogLikelihood(CopulaFamily family, std::span<const double> u, std::span<const double> v);

    // -inf outside the parameter domain.
    double operator()(double theta) const;

    CopulaFamily family() const noexcept { return family_; }
    std::size_t size() const noexcept { return a_.size(); }

private:
    CopulaFamily family_;
    // Clayton: log u, log v (reflected for SurvClayton).
    // Frank: u, v.  Gaussian: normal scores.
    std::vector<double> a_, b_;
    double sum_ab_ = 0.0, sum_sq_ = 0.0, sum_cross_ = 0.0;
};

}  // namespace copadapt
