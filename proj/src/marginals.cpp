#include "copadapt/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "copadapt/errors.hpp"
#include "copadapt/special.hpp"

namespace copadapt {

std::string to_string(MarginalFamily family) {
    switch (family) {
        case MarginalFamily::Gaussian: return "gaussian";
        case MarginalFamily::GaussMixture: return "mixture";
        case MarginalFamily::RandomInterceptLM: return "random-intercept";
    }
    return "unknown";
}

MarginalFamily parse_marginal_family(std::string_view name) {
    if (name == "gaussian") return MarginalFamily::Gaussian;
    if (name == "mixture") return MarginalFamily::GaussMixture;
    if (name == "random-intercept") return MarginalFamily::RandomInterceptLM;
    throw ConfigError("unknown marginal family '" + std::string(name) + "'");
}

MarginalModel MarginalModel::gaussian(double mean, double sd) {
    MarginalModel m;
    m.family = MarginalFamily::Gaussian;
    m.components = {MixtureComponent{1.0, mean, sd}};
    return m;
}

MarginalModel MarginalModel::mixture(std::vector<MixtureComponent> components) {
    MarginalModel m;
    m.family = MarginalFamily::GaussMixture;
    m.components = std::move(components);
    return m;
}

MarginalModel MarginalModel::random_intercept(std::vector<double> beta, double sd) {
    MarginalModel m;
    m.family = MarginalFamily::RandomInterceptLM;
    m.components = {MixtureComponent{1.0, 0.0, sd}};
    m.beta = std::move(beta);
    return m;
}

double MarginalModel::mean(std::span<const double> covariates, double athlete_effect) const {
    double mu = 0.0;
    for (const auto& c : components) mu += c.weight * c.mean;
    return mu + location_shift(*this, covariates, athlete_effect);
}

void validate(const MarginalModel& model) {
    if (model.components.empty()) throw ParameterDomainError("marginal model has no components");
    double total = 0.0;
    for (const auto& c : model.components) {
        if (!(c.sd > 0.0) || !std::isfinite(c.sd))
            throw ParameterDomainError("marginal scale must be positive, got " + std::to_string(c.sd));
        if (!(c.weight >= 0.0)) throw ParameterDomainError("mixture weight must be nonnegative");
        if (!std::isfinite(c.mean)) throw ParameterDomainError("marginal location must be finite");
        total += c.weight;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw ParameterDomainError("mixture weights sum to " + std::to_string(total) + ", expected 1");
    if (model.family != MarginalFamily::GaussMixture && model.components.size() != 1)
        throw ParameterDomainError(to_string(model.family) + " marginal must have exactly one component");
    if (model.family != MarginalFamily::RandomInterceptLM && !model.beta.empty())
        throw ParameterDomainError("only the random-intercept family carries coefficients");
}

double location_shift(const MarginalModel& model, std::span<const double> covariates, double athlete_effect) {
    if (model.family != MarginalFamily::RandomInterceptLM) {
        if (!covariates.empty())
            throw ShapeError("covariates supplied to a " + to_string(model.family) + " marginal");
        return 0.0;
    }
    if (covariates.size() != model.beta.size())
        throw ShapeError("covariate vector has length " + std::to_string(covariates.size()) + " but beta has length " +
                         std::to_string(model.beta.size()));
    double s = athlete_effect;
    for (std::size_t j = 0; j < covariates.size(); ++j) s += covariates[j] * model.beta[j];
    return s;
}

double marginal_pdf(const MarginalModel& model, double y, std::span<const double> covariates, double athlete_effect) {
    const double x = y - location_shift(model, covariates, athlete_effect);
    double d = 0.0;
    for (const auto& c : model.components) d += c.weight * norm_pdf((x - c.mean) / c.sd) / c.sd;
    return d;
}

double marginal_log_pdf(const MarginalModel& model, double y, std::span<const double> covariates,
                        double athlete_effect) {
    const double x = y - location_shift(model, covariates, athlete_effect);
    if (model.components.size() == 1) {
        const auto& c = model.components.front();
        return norm_logpdf((x - c.mean) / c.sd) - std::log(c.sd);
    }
    double mx = -std::numeric_limits<double>::infinity();
    for (const auto& c : model.components)
        mx = std::max(mx, std::log(c.weight) + norm_logpdf((x - c.mean) / c.sd) - std::log(c.sd));
    if (!std::isfinite(mx)) return mx;
    double acc = 0.0;
    for (const auto& c : model.components)
        acc += std::exp(std::log(c.weight) + norm_logpdf((x - c.mean) / c.sd) - std::log(c.sd) - mx);
    return mx + std::log(acc);
}

double marginal_cdf(const MarginalModel& model, double y, std::span<const double> covariates, double athlete_effect) {
    const double x = y - location_shift(model, covariates, athlete_effect);
    double p = 0.0;
    for (const auto& c : model.components) p += c.weight * norm_cdf((x - c.mean) / c.sd);
    return std::clamp(p, 0.0, 1.0);
}

double marginal_quantile(const MarginalModel& model, double p, std::span<const double> covariates,
                         double athlete_effect) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1), got " + std::to_string(p));
    const double shift = location_shift(model, covariates, athlete_effect);
    if (model.components.size() == 1) {
        const auto& c = model.components.front();
        return shift + c.mean + c.sd * norm_quantile(p);
    }
    auto cdf = [&](double x) {
        double s = 0.0;
        for (const auto& c : model.components) s += c.weight * norm_cdf((x - c.mean) / c.sd);
        return s;
    };
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double max_sd = 0.0;
    for (const auto& c : model.components) {
        lo = std::min(lo, c.mean - 10.0 * c.sd);
        hi = std::max(hi, c.mean + 10.0 * c.sd);
        max_sd = std::max(max_sd, c.sd);
    }
    for (int i = 0; i < 64 && cdf(lo) > p; ++i) lo -= 10.0 * max_sd;
    for (int i = 0; i < 64 && cdf(hi) < p; ++i) hi += 10.0 * max_sd;

    constexpr int kMaxIter = 200;
    int iter = 0;
    for (; iter < kMaxIter; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (hi - lo <= 1e-13 * std::max(1.0, std::abs(mid))) break;
        (cdf(mid) < p ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    // Newton polishing inside the final bracket.
    for (int k = 0; k < 3; ++k) {
        double dens = 0.0;
        for (const auto& c : model.components) dens += c.weight * norm_pdf((x - c.mean) / c.sd) / c.sd;
        if (!(dens > 0.0)) break;
        const double next = x - (cdf(x) - p) / dens;
        if (!(next >= lo && next <= hi)) break;
        x = next;
    }
    const double err = std::abs(cdf(x) - p);
    if (iter == kMaxIter || err > 1e-8) {
        std::ostringstream msg;
        msg << "mixture quantile did not converge: p=" << p << " x=" << x << " |F(x)-p|=" << err
            << " iterations=" << iter;
        throw NumericalError(msg.str());
    }
    return shift + x;
}

double marginal_draw(const MarginalModel& model, Rng& rng, double shift) {
    const MixtureComponent* comp = &model.components.front();
    if (model.components.size() > 1) {
        const double u = uniform01(rng);
        double acc = 0.0;
        comp = &model.components.back();
        for (const auto& c : model.components) {
            acc += c.weight;
            if (u < acc) {
                comp = &c;
                break;
            }
        }
    }
    return shift + comp->mean + comp->sd * standard_normal(rng);
}

std::vector<double> marginal_sample(const MarginalModel& model, std::size_t n, std::uint64_t seed,
                                    std::span<const double> covariates, double athlete_effect) {
    validate(model);
    const double shift = location_shift(model, covariates, athlete_effect);
    Rng rng(seed);
    std::vector<double> out(n);
    for (auto& y : out) y = marginal_draw(model, rng, shift);
    return out;
}

void sort_components_by_mean(MarginalModel& model) {
    std::stable_sort(model.components.begin(), model.components.end(),
                     [](const MixtureComponent& a, const MixtureComponent& b) { return a.mean < b.mean; });
}

}  // namespace copadapt
