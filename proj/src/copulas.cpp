#include "copadapt/copulas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "copadapt/errors.hpp"
#include "copadapt/special.hpp"

namespace copadapt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(u^-t + v^-t - 1) given la = log u, lb = log v, t > 0.
double clayton_log_s(double theta, double la, double lb) {
    const double a = -theta * la;
    const double b = -theta * lb;
    const double mx = std::max(a, b);
    const double mn = std::min(a, b);
    return mx + std::log1p(std::exp(-mx) * std::expm1(mn));
}

double clayton_log_density(double theta, double la, double lb) {
    return std::log1p(theta) - (1.0 + theta) * (la + lb) - (2.0 + 1.0 / theta) * clayton_log_s(theta, la, lb);
}

double clayton_cdf(double theta, double u, double v) {
    if (u <= 0.0 || v <= 0.0) return 0.0;
    if (u >= 1.0) return v;
    if (v >= 1.0) return u;
    return std::exp(-clayton_log_s(theta, std::log(u), std::log(v)) / theta);
}

// dC/du of the Clayton copula.
double clayton_h(double theta, double u, double v) {
    if (v <= 0.0) return 0.0;
    if (v >= 1.0) return 1.0;
    const double la = std::log(u);
    const double ls = clayton_log_s(theta, la, std::log(v));
    return std::exp((-theta - 1.0) * la + (-1.0 / theta - 1.0) * ls);
}

bool frank_is_independent(double theta) {
    return std::abs(theta) < kFrankIndependenceCutoff;
}

double frank_log_density(double theta, double u, double v) {
    if (frank_is_independent(theta)) return std::log1p(theta * (1.0 - 2.0 * u) * (1.0 - 2.0 * v));
    const double em = -std::expm1(-theta);
    const double denom = em - std::expm1(-theta * u) * std::expm1(-theta * v);
    return std::log(theta * em) - theta * (u + v) - 2.0 * std::log(std::abs(denom));
}

double frank_cdf(double theta, double u, double v) {
    if (frank_is_independent(theta)) return u * v + 0.5 * theta * u * v * (1.0 - u) * (1.0 - v);
    const double num = std::expm1(-theta * u) * std::expm1(-theta * v);
    return -std::log1p(num / std::expm1(-theta)) / theta;
}

double frank_h(double theta, double u, double v) {
    if (frank_is_independent(theta)) return v + theta * v * (1.0 - v) * (1.0 - 2.0 * u);
    const double eu = std::exp(-theta * u);
    const double ev1 = std::expm1(-theta * v);
    return eu * ev1 / (std::expm1(-theta) + std::expm1(-theta * u) * ev1);
}

double gaussian_log_density_scores(double rho, double x, double y) {
    const double r2 = 1.0 - rho * rho;
    return -0.5 * std::log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2);
}

double clamp_open(double p) {
    constexpr double lo = std::numeric_limits<double>::min();
    constexpr double hi = 1.0 - 0x1.0p-53;
    return std::clamp(p, lo, hi);
}

// Debye function of order one: (1/x) * int_0^x t / (e^t - 1) dt.
double debye1(double x) {
    auto integrand = [](double t) { return std::abs(t) < 1e-12 ? 1.0 - t / 2.0 : t / std::expm1(t); };
    const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, x, 10, 1e-13);
    return integral / x;
}

void check_unit_square(double u, double v) {
    if (!(u >= 0.0 && u <= 1.0 && v >= 0.0 && v <= 1.0))
        throw DomainError("copula argument outside the unit square: (" + std::to_string(u) + ", " + std::to_string(v) +
                          ")");
}

void check_open_unit_square(double u, double v) {
    if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0))
        throw DomainError("copula density requires a point strictly inside the unit square: (" + std::to_string(u) +
                          ", " + std::to_string(v) + ")");
}

}  // namespace

std::string to_string(CopulaFamily family) {
    switch (family) {
        case CopulaFamily::Clayton: return "clayton";
        case CopulaFamily::SurvClayton: return "survclayton";
        case CopulaFamily::Frank: return "frank";
        case CopulaFamily::Gaussian: return "gaussian";
        case CopulaFamily::Independence: return "independence";
    }
    return "unknown";
}

CopulaFamily parse_copula_family(std::string_view name) {
    if (name == "clayton") return CopulaFamily::Clayton;
    if (name == "survclayton" || name == "survival-clayton") return CopulaFamily::SurvClayton;
    if (name == "frank") return CopulaFamily::Frank;
    if (name == "gaussian") return CopulaFamily::Gaussian;
    if (name == "independence") return CopulaFamily::Independence;
    throw ConfigError("unknown copula family '" + std::string(name) + "'");
}

bool theta_in_domain(CopulaFamily family, double theta) noexcept {
    switch (family) {
        case CopulaFamily::Clayton:
        case CopulaFamily::SurvClayton: return std::isfinite(theta) && theta > 0.0;
        case CopulaFamily::Frank: return std::isfinite(theta) && theta != 0.0;
        case CopulaFamily::Gaussian: return theta > -1.0 && theta < 1.0;
        case CopulaFamily::Independence: return true;
    }
    return false;
}

void validate(const CopulaModel& model) {
    if (!theta_in_domain(model.family, model.theta))
        throw ParameterDomainError("theta = " + std::to_string(model.theta) + " outside the domain of the " +
                                   to_string(model.family) + " copula");
}

double copula_cdf(const CopulaModel& model, double u, double v) {
    validate(model);
    check_unit_square(u, v);
    switch (model.family) {
        case CopulaFamily::Clayton: return clayton_cdf(model.theta, u, v);
        case CopulaFamily::SurvClayton:
            return std::clamp(u + v - 1.0 + clayton_cdf(model.theta, 1.0 - u, 1.0 - v), 0.0, std::min(u, v));
        case CopulaFamily::Frank:
            if (u <= 0.0 || v <= 0.0) return 0.0;
            if (u >= 1.0) return v;
            if (v >= 1.0) return u;
            return frank_cdf(model.theta, u, v);
        case CopulaFamily::Gaussian:
            if (u <= 0.0 || v <= 0.0) return 0.0;
            if (u >= 1.0) return v;
            if (v >= 1.0) return u;
            return bivariate_normal_cdf(norm_quantile(u), norm_quantile(v), model.theta);
        case CopulaFamily::Independence: return u * v;
    }
    return 0.0;
}

double copula_log_pdf(const CopulaModel& model, double u, double v) {
    validate(model);
    check_open_unit_square(u, v);
    switch (model.family) {
        case CopulaFamily::Clayton: return clayton_log_density(model.theta, std::log(u), std::log(v));
        case CopulaFamily::SurvClayton:
            return clayton_log_density(model.theta, std::log(1.0 - u), std::log(1.0 - v));
        case CopulaFamily::Frank: return frank_log_density(model.theta, u, v);
        case CopulaFamily::Gaussian:
            return gaussian_log_density_scores(model.theta, norm_quantile(u), norm_quantile(v));
        case CopulaFamily::Independence: return 0.0;
    }
    return 0.0;
}

double copula_pdf(const CopulaModel& model, double u, double v) {
    return std::exp(copula_log_pdf(model, u, v));
}

double copula_conditional_cdf(const CopulaModel& model, double u, double v) {
    validate(model);
    check_unit_square(u, v);
    switch (model.family) {
        case CopulaFamily::Clayton: return clayton_h(model.theta, u, v);
        case CopulaFamily::SurvClayton: return 1.0 - clayton_h(model.theta, 1.0 - u, 1.0 - v);
        case CopulaFamily::Frank: return frank_h(model.theta, u, v);
        case CopulaFamily::Gaussian: {
            const double r = model.theta;
            return norm_cdf((norm_quantile(v) - r * norm_quantile(u)) / std::sqrt(1.0 - r * r));
        }
        case CopulaFamily::Independence: return v;
    }
    return v;
}

UnitPoint copula_draw(const CopulaModel& model, Rng& rng) {
    const double u = uniform01(rng);
    const double w = uniform01(rng);
    const double t = model.theta;
    switch (model.family) {
        case CopulaFamily::Independence: return {u, w};
        case CopulaFamily::Clayton:
        case CopulaFamily::SurvClayton: {
            // Invert the h-function of the Clayton copula at level w.
            const double s = std::exp(-t * std::log(u)) * std::expm1(-t / (1.0 + t) * std::log(w));
            const double v = clamp_open(std::exp(-std::log1p(s) / t));
            if (model.family == CopulaFamily::Clayton) return {u, v};
            return {clamp_open(1.0 - u), clamp_open(1.0 - v)};
        }
        case CopulaFamily::Frank: {
            if (frank_is_independent(t)) return {u, w};
            const double num = w * std::expm1(-t);
            const double den = w + (1.0 - w) * std::exp(-t * u);
            return {u, clamp_open(-std::log1p(num / den) / t)};
        }
        case CopulaFamily::Gaussian: {
            const double z1 = norm_quantile(u);
            const double z2 = t * z1 + std::sqrt(1.0 - t * t) * norm_quantile(w);
            return {u, clamp_open(norm_cdf(z2))};
        }
    }
    return {u, w};
}

std::vector<UnitPoint> copula_sample(const CopulaModel& model, std::size_t n, std::uint64_t seed) {
    validate(model);
    Rng rng(seed);
    std::vector<UnitPoint> out(n);
    for (auto& p : out) p = copula_draw(model, rng);
    return out;
}

double kendall_tau(const CopulaModel& model) {
    const double t = model.theta;
    switch (model.family) {
        case CopulaFamily::Clayton:
        case CopulaFamily::SurvClayton: return t / (t + 2.0);
        case CopulaFamily::Gaussian: return 2.0 / std::numbers::pi * std::asin(t);
        case CopulaFamily::Frank:
            if (std::abs(t) < 1e-4) return t / 9.0;
            return 1.0 - 4.0 / t * (1.0 - debye1(t));
        case CopulaFamily::Independence: return 0.0;
    }
    return 0.0;
}

CopulaLogLikelihood::CopulaLogLikelihood(CopulaFamily family, std::span<const double> u, std::span<const double> v)
    : family_(family) {
    if (u.size() != v.size()) throw ShapeError("pseudo-observation columns differ in length");
    a_.resize(u.size());
    b_.resize(v.size());
    for (std::size_t i = 0; i < u.size(); ++i) {
        check_open_unit_square(u[i], v[i]);
        switch (family) {
            case CopulaFamily::Clayton:
                a_[i] = std::log(u[i]);
                b_[i] = std::log(v[i]);
                break;
            case CopulaFamily::SurvClayton:
                a_[i] = std::log(1.0 - u[i]);
                b_[i] = std::log(1.0 - v[i]);
                break;
            case CopulaFamily::Frank:
            case CopulaFamily::Independence:
                a_[i] = u[i];
                b_[i] = v[i];
                break;
            case CopulaFamily::Gaussian:
                a_[i] = norm_quantile(u[i]);
                b_[i] = norm_quantile(v[i]);
                break;
        }
        sum_ab_ += a_[i] + b_[i];
        sum_sq_ += a_[i] * a_[i] + b_[i] * b_[i];
        sum_cross_ += a_[i] * b_[i];
    }
}

double CopulaLogLikelihood::operator()(double theta) const {
    if (!theta_in_domain(family_, theta)) return kNegInf;
    const auto n = static_cast<double>(a_.size());
    switch (family_) {
        case CopulaFamily::Independence: return 0.0;
        case CopulaFamily::Gaussian: {
            const double r2 = 1.0 - theta * theta;
            return -0.5 * n * std::log(r2) - (theta * theta * sum_sq_ - 2.0 * theta * sum_cross_) / (2.0 * r2);
        }
        case CopulaFamily::Clayton:
        case CopulaFamily::SurvClayton: {
            double acc = n * std::log1p(theta) - (1.0 + theta) * sum_ab_;
            const double power = 2.0 + 1.0 / theta;
            double ls = 0.0;
            for (std::size_t i = 0; i < a_.size(); ++i) ls += clayton_log_s(theta, a_[i], b_[i]);
            return acc - power * ls;
        }
        case CopulaFamily::Frank: {
            if (frank_is_independent(theta)) {
                double acc = 0.0;
                for (std::size_t i = 0; i < a_.size(); ++i)
                    acc += std::log1p(theta * (1.0 - 2.0 * a_[i]) * (1.0 - 2.0 * b_[i]));
                return acc;
            }
            const double em = -std::expm1(-theta);
            double acc = n * std::log(theta * em) - theta * sum_ab_;
            double ld = 0.0;
            for (std::size_t i = 0; i < a_.size(); ++i)
                ld += std::log(std::abs(em - std::expm1(-theta * a_[i]) * std::expm1(-theta * b_[i])));
            return acc - 2.0 * ld;
        }
    }
    return kNegInf;
}

}  // namespace copadapt
