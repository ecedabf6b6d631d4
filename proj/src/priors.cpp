#include "copadapt/priors.hpp"

#include <cmath>
#include <numeric>

#include "copadapt/errors.hpp"
#include "copadapt/special.hpp"

namespace copadapt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Mass of N(0,1) on [a, b], computed on the side of zero that keeps precision.
double normal_mass(double a, double b) {
    if (a > 0.0) return norm_cdf(-a) - norm_cdf(-b);
    return norm_cdf(b) - norm_cdf(a);
}

double truncated_normal_draw(const NormalPrior& p, Rng& rng) {
    const double a = (p.lower - p.mean) / p.sd;
    const double b = (p.upper - p.mean) / p.sd;
    const double u = uniform01(rng);
    double z;
    if (a > 0.0) {
        // Work with upper-tail probabilities to avoid cancellation.
        const double qa = norm_cdf(-a);
        const double qb = norm_cdf(-b);
        z = -norm_quantile(qb + u * (qa - qb));
    } else {
        const double pa = norm_cdf(a);
        const double pb = norm_cdf(b);
        z = norm_quantile(pa + u * (pb - pa));
    }
    return std::clamp(p.mean + p.sd * z, p.lower, p.upper);
}

}  // namespace

std::string prior_kind(const Prior& prior) {
    return std::visit(Overloaded{[](const NormalPrior&) { return std::string("normal"); },
                                 [](const HalfTPrior&) { return std::string("half-t"); },
                                 [](const DirichletPrior&) { return std::string("dirichlet"); },
                                 [](const LogNormalPrior&) { return std::string("lognormal"); },
                                 [](const PointMassPrior&) { return std::string("point-mass"); }},
                      prior);
}

void validate(const Prior& prior) {
    std::visit(Overloaded{[](const NormalPrior& p) {
                              if (!(p.sd > 0.0) || !std::isfinite(p.mean))
                                  throw ParameterDomainError("normal prior needs finite mean and sd > 0");
                              if (!(p.lower < p.upper) || normal_mass((p.lower - p.mean) / p.sd,
                                                                      (p.upper - p.mean) / p.sd) <= 0.0)
                                  throw ParameterDomainError("normal prior truncation leaves no mass");
                          },
                          [](const HalfTPrior& p) {
                              if (!(p.df >= 1.0)) throw ParameterDomainError("half-t prior needs df >= 1");
                              if (!(p.scale > 0.0)) throw ParameterDomainError("half-t prior needs scale > 0");
                          },
                          [](const DirichletPrior& p) {
                              if (p.concentration.empty())
                                  throw ParameterDomainError("dirichlet prior needs concentrations");
                              for (double a : p.concentration)
                                  if (!(a > 0.0)) throw ParameterDomainError("dirichlet concentrations must be > 0");
                          },
                          [](const LogNormalPrior& p) {
                              if (!(p.logsd > 0.0)) throw ParameterDomainError("lognormal prior needs logsd > 0");
                          },
                          [](const PointMassPrior& p) {
                              if (!std::isfinite(p.value)) throw ParameterDomainError("point mass must be finite");
                          }},
               prior);
}

double prior_logpdf(const Prior& prior, double x) {
    return std::visit(
        Overloaded{[x](const NormalPrior& p) {
                       if (!(x >= p.lower && x <= p.upper)) return kNegInf;
                       double lp = norm_logpdf((x - p.mean) / p.sd) - std::log(p.sd);
                       if (std::isfinite(p.lower) || std::isfinite(p.upper))
                           lp -= std::log(normal_mass((p.lower - p.mean) / p.sd, (p.upper - p.mean) / p.sd));
                       return lp;
                   },
                   [x](const HalfTPrior& p) {
                       if (!(x >= 0.0)) return kNegInf;
                       // Mass of the untruncated t above zero is T(location / scale).
                       return student_t_logpdf((x - p.location) / p.scale, p.df) - std::log(p.scale) -
                              std::log(student_t_cdf(p.location / p.scale, p.df));
                   },
                   [](const DirichletPrior&) -> double {
                       throw PreconditionError("dirichlet prior must be evaluated on a weight vector");
                   },
                   [x](const LogNormalPrior& p) {
                       if (!(x > 0.0)) return kNegInf;
                       const double lx = std::log(x);
                       return norm_logpdf((lx - p.logmean) / p.logsd) - std::log(p.logsd) - lx;
                   },
                   [x](const PointMassPrior& p) { return x == p.value ? 0.0 : kNegInf; }},
        prior);
}

double prior_logpdf(const DirichletPrior& prior, std::span<const double> w) {
    if (w.size() != prior.concentration.size())
        throw ShapeError("weight vector length does not match the dirichlet dimension");
    double total = 0.0;
    for (double x : w) {
        if (!(x >= 0.0)) return kNegInf;
        total += x;
    }
    if (std::abs(total - 1.0) > 1e-9) return kNegInf;
    double sum_alpha = 0.0, lp = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        const double a = prior.concentration[k];
        sum_alpha += a;
        lp += (a - 1.0) * std::log(w[k]) - std::lgamma(a);
    }
    return lp + std::lgamma(sum_alpha);
}

double prior_draw(const Prior& prior, Rng& rng) {
    return std::visit(
        Overloaded{[&rng](const NormalPrior& p) {
                       if (std::isinf(p.lower) && std::isinf(p.upper))
                           return p.mean + p.sd * standard_normal(rng);
                       return truncated_normal_draw(p, rng);
                   },
                   [&rng](const HalfTPrior& p) {
                       const double p0 = student_t_cdf(-p.location / p.scale, p.df);
                       const double q = p0 + (1.0 - p0) * uniform01(rng);
                       const double x = p.location + p.scale * student_t_quantile(q, p.df);
                       return x > 0.0 ? x : std::numeric_limits<double>::min();
                   },
                   [](const DirichletPrior&) -> double {
                       throw PreconditionError("dirichlet prior must be drawn as a weight vector");
                   },
                   [&rng](const LogNormalPrior& p) { return std::exp(p.logmean + p.logsd * standard_normal(rng)); },
                   [](const PointMassPrior& p) { return p.value; }},
        prior);
}

std::vector<double> dirichlet_draw(const DirichletPrior& prior, Rng& rng) {
    std::vector<double> w(prior.concentration.size());
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] = gamma_draw(rng, prior.concentration[k]);
        total += w[k];
    }
    for (double& x : w) x /= total;
    return w;
}

std::size_t MarginalPrior::num_components() const {
    return family == MarginalFamily::RandomInterceptLM ? 1 : locations.size();
}

void validate(const MarginalPrior& prior) {
    for (const auto& p : prior.locations) validate(p);
    for (const auto& p : prior.scales) validate(p);
    switch (prior.family) {
        case MarginalFamily::Gaussian:
            if (prior.locations.size() != 1 || prior.scales.size() != 1)
                throw ConfigError("gaussian marginal prior needs one location and one scale prior");
            break;
        case MarginalFamily::GaussMixture: {
            const auto k = prior.locations.size();
            if (k == 0 || prior.scales.size() != k)
                throw ConfigError("mixture prior needs matching location and scale priors per component");
            if (!prior.fixed_weights.empty()) {
                if (prior.fixed_weights.size() != k) throw ConfigError("fixed weights do not match component count");
            } else if (k > 1) {
                if (!prior.weights || prior.weights->concentration.size() != k)
                    throw ConfigError("mixture prior needs a dirichlet prior with one concentration per component");
                validate(Prior{*prior.weights});
            }
            break;
        }
        case MarginalFamily::RandomInterceptLM:
            if (prior.scales.size() != 1) throw ConfigError("random-intercept prior needs one residual scale prior");
            if (!prior.intercept_variance) throw ConfigError("random-intercept prior needs an intercept variance prior");
            validate(*prior.intercept_variance);
            break;
    }
}

void validate(const PriorSpec& spec) {
    validate(spec.hgb);
    validate(spec.offs);
    validate(spec.copula);
}

double marginal_prior_logpdf(const MarginalPrior& prior, const MarginalModel& model) {
    double lp = 0.0;
    if (prior.family == MarginalFamily::RandomInterceptLM) {
        if (model.beta.size() != prior.locations.size()) throw ShapeError("coefficient count does not match prior");
        for (std::size_t j = 0; j < model.beta.size(); ++j) lp += prior_logpdf(prior.locations[j], model.beta[j]);
        return lp + prior_logpdf(prior.scales[0], model.components[0].sd);
    }
    const auto k = model.components.size();
    if (k != prior.locations.size()) throw ShapeError("component count does not match prior");
    std::vector<double> w(k);
    for (std::size_t i = 0; i < k; ++i) {
        lp += prior_logpdf(prior.locations[i], model.components[i].mean);
        lp += prior_logpdf(prior.scales[i], model.components[i].sd);
        w[i] = model.components[i].weight;
    }
    if (k > 1 && prior.fixed_weights.empty() && prior.weights) lp += prior_logpdf(*prior.weights, w);
    return lp;
}

MarginalModel marginal_prior_draw(const MarginalPrior& prior, Rng& rng) {
    if (prior.family == MarginalFamily::RandomInterceptLM) {
        std::vector<double> beta(prior.locations.size());
        for (std::size_t j = 0; j < beta.size(); ++j) beta[j] = prior_draw(prior.locations[j], rng);
        return MarginalModel::random_intercept(std::move(beta), prior_draw(prior.scales[0], rng));
    }
    const auto k = prior.locations.size();
    std::vector<double> w(k, 1.0);
    if (!prior.fixed_weights.empty()) {
        w = prior.fixed_weights;
    } else if (k > 1) {
        w = dirichlet_draw(*prior.weights, rng);
    }
    std::vector<MixtureComponent> comps(k);
    for (std::size_t i = 0; i < k; ++i) {
        comps[i].weight = w[i];
        comps[i].mean = prior_draw(prior.locations[i], rng);
        comps[i].sd = prior_draw(prior.scales[i], rng);
    }
    if (prior.family == MarginalFamily::Gaussian) return MarginalModel::gaussian(comps[0].mean, comps[0].sd);
    return MarginalModel::mixture(std::move(comps));
}

}  // namespace copadapt
