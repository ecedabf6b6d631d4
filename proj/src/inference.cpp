#include "copadapt/inference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "copadapt/errors.hpp"
#include "copadapt/parallel.hpp"
#include "copadapt/special.hpp"
#include "copadapt/stats.hpp"

namespace copadapt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// ---- Gaussian / mixture marginals -------------------------------------
//
// Free coordinates: mu_1..mu_K, log sigma_1..log sigma_K, then K-1
// additive log-ratios a_k = log(w_k / w_K) when the weights are sampled.

struct MixtureLayout {
    std::size_t k = 1;
    bool free_weights = false;
    std::vector<double> fixed_weights;

    std::size_t dim() const { return 2 * k + (free_weights ? k - 1 : 0); }

    void weights(std::span<const double> z, std::vector<double>& w) const {
        w.resize(k);
        if (!free_weights) {
            if (fixed_weights.empty()) {
                w.assign(k, 1.0);
            } else {
                w = fixed_weights;
            }
            return;
        }
        double mx = 0.0;
        for (std::size_t j = 0; j + 1 < k; ++j) mx = std::max(mx, z[2 * k + j]);
        double total = std::exp(-mx);
        for (std::size_t j = 0; j + 1 < k; ++j) total += std::exp(z[2 * k + j] - mx);
        for (std::size_t j = 0; j + 1 < k; ++j) w[j] = std::exp(z[2 * k + j] - mx) / total;
        w[k - 1] = std::exp(-mx) / total;
    }

    MarginalModel model(std::span<const double> z, MarginalFamily family) const {
        std::vector<double> w;
        weights(z, w);
        std::vector<MixtureComponent> comps(k);
        for (std::size_t j = 0; j < k; ++j) comps[j] = {w[j], z[j], std::exp(z[k + j])};
        if (family == MarginalFamily::Gaussian) return MarginalModel::gaussian(comps[0].mean, comps[0].sd);
        return MarginalModel::mixture(std::move(comps));
    }
};

double mixture_log_target(std::span<const double> z, const MixtureLayout& layout, const MarkerData& data,
                          const MarginalPrior& prior) {
    const std::size_t k = layout.k;
    thread_local std::vector<double> w, c, inv;
    layout.weights(z, w);
    c.resize(k);
    inv.resize(k);
    double lp = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
        const double sigma = std::exp(z[k + j]);
        if (!(sigma > 0.0) || !std::isfinite(sigma)) return kNegInf;
        lp += prior_logpdf(prior.locations[j], z[j]);
        lp += prior_logpdf(prior.scales[j], sigma) + z[k + j];
        if (!(w[j] > 0.0)) return kNegInf;
        c[j] = std::log(w[j]) - z[k + j] - kLogSqrt2Pi;
        inv[j] = 1.0 / sigma;
    }
    if (layout.free_weights) {
        if (prior.weights) lp += prior_logpdf(*prior.weights, std::span<const double>(w));
        for (double x : w) lp += std::log(x);  // Jacobian of the log-ratio map
    }
    if (!std::isfinite(lp)) return lp;
    if (k == 1) {
        const double mu = z[0];
        double ss = 0.0;
        for (double y : data.y) ss += (y - mu) * (y - mu);
        return lp + static_cast<double>(data.y.size()) * c[0] - 0.5 * ss * inv[0] * inv[0];
    }
    double ll = 0.0;
    for (double y : data.y) {
        double mx = kNegInf;
        for (std::size_t j = 0; j < k; ++j) {
            const double e = (y - z[j]) * inv[j];
            const double t = c[j] - 0.5 * e * e;
            mx = std::max(mx, t);
        }
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            const double e = (y - z[j]) * inv[j];
            s += std::exp(c[j] - 0.5 * e * e - mx);
        }
        ll += mx + std::log(s);
    }
    return lp + ll;
}

// Quantile-split start followed by EM.
std::vector<MixtureComponent> em_start(const std::vector<double>& y, std::size_t k, std::span<const double> fixed) {
    std::vector<double> s = y;
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    const double overall_sd = std::max(stats::sd(y), 1e-6);
    std::vector<MixtureComponent> comp(k);
    for (std::size_t j = 0; j < k; ++j) {
        const std::size_t lo = j * n / k, hi = std::max(lo + 1, (j + 1) * n / k);
        std::span<const double> part(s.data() + lo, std::min(hi, n) - lo);
        comp[j].mean = stats::mean(part);
        comp[j].sd = part.size() > 1 ? std::max(stats::sd(part), 0.05 * overall_sd) : overall_sd;
        comp[j].weight = fixed.empty() ? 1.0 / static_cast<double>(k) : fixed[j];
    }
    if (k == 1 || n < 2 * k) return comp;
    std::vector<double> r(n * k);
    for (int it = 0; it < 200; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            double tot = 0.0;
            for (std::size_t j = 0; j < k; ++j) {
                const double d = comp[j].weight * norm_pdf((y[i] - comp[j].mean) / comp[j].sd) / comp[j].sd;
                r[i * k + j] = d;
                tot += d;
            }
            for (std::size_t j = 0; j < k; ++j) r[i * k + j] = tot > 0.0 ? r[i * k + j] / tot : 1.0 / k;
        }
        for (std::size_t j = 0; j < k; ++j) {
            double nk = 0.0, m = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                nk += r[i * k + j];
                m += r[i * k + j] * y[i];
            }
            if (nk < 1e-8) continue;
            m /= nk;
            double v = 0.0;
            for (std::size_t i = 0; i < n; ++i) v += r[i * k + j] * (y[i] - m) * (y[i] - m);
            comp[j].mean = m;
            comp[j].sd = std::max(std::sqrt(v / nk), 0.02 * overall_sd);
            if (fixed.empty()) comp[j].weight = nk / static_cast<double>(n);
        }
    }
    std::sort(comp.begin(), comp.end(), [](const auto& a, const auto& b) { return a.mean < b.mean; });
    return comp;
}

MarginalPosterior fit_mixture(const MarkerData& data, const MarginalPrior& prior, const McmcConfig& config) {
    MixtureLayout layout;
    layout.k = prior.locations.size();
    layout.fixed_weights = prior.fixed_weights;
    layout.free_weights = layout.k > 1 && prior.fixed_weights.empty();

    const auto start = em_start(data.y, layout.k, prior.fixed_weights);
    std::vector<double> init(layout.dim()), scales(layout.dim());
    const double n = static_cast<double>(data.size());
    for (std::size_t j = 0; j < layout.k; ++j) {
        const double nk = std::max(2.0, n * start[j].weight);
        init[j] = start[j].mean;
        init[layout.k + j] = std::log(start[j].sd);
        scales[j] = start[j].sd / std::sqrt(nk);
        scales[layout.k + j] = 1.0 / std::sqrt(2.0 * nk);
    }
    if (layout.free_weights) {
        for (std::size_t j = 0; j + 1 < layout.k; ++j) {
            init[2 * layout.k + j] = std::log(std::max(start[j].weight, 1e-3) / std::max(start.back().weight, 1e-3));
            scales[2 * layout.k + j] = 1.0 / std::sqrt(std::max(2.0, n * start[j].weight));
        }
    }
    // Too few points for EM, or a start outside the prior support: begin at
    // the prior centre instead.
    if (data.size() < 10 * layout.k || !std::isfinite(mixture_log_target(init, layout, data, prior))) {
        for (std::size_t j = 0; j < layout.k; ++j) {
            if (const auto* np = std::get_if<NormalPrior>(&prior.locations[j])) init[j] = np->mean;
            if (const auto* hp = std::get_if<HalfTPrior>(&prior.scales[j]))
                init[layout.k + j] = std::log(std::max(hp->location, hp->scale));
        }
    }

    McmcConfig cfg = config;
    if (cfg.proposal_scales.empty()) cfg.proposal_scales = scales;
    const auto res = rw_mh([&](std::span<const double> z) { return mixture_log_target(z, layout, data, prior); },
                           init, cfg);

    MarginalPosterior out;
    out.acceptance = res.mean_acceptance();
    out.warnings = res.warnings;
    out.draws.reserve(res.rows());
    for (std::size_t i = 0; i < res.rows(); ++i) {
        auto m = layout.model(res.row(i), prior.family);
        sort_components_by_mean(m);
        out.draws.push_back(std::move(m));
    }
    return out;
}

// ---- Random-intercept linear model -------------------------------------
//
// Free coordinates: beta_1..beta_p, log sigma, b_1..b_A, log var(b_1)..log var(b_A).

std::vector<double> least_squares(const MarkerData& data, std::size_t p) {
    std::vector<double> a(p * p, 0.0), rhs(p, 0.0);
    for (std::size_t i = 0; i < data.size(); ++i) {
        const auto& x = data.covariates[i];
        for (std::size_t r = 0; r < p; ++r) {
            rhs[r] += x[r] * data.y[i];
            for (std::size_t c = 0; c < p; ++c) a[r * p + c] += x[r] * x[c];
        }
    }
    for (std::size_t r = 0; r < p; ++r) a[r * p + r] += 1e-9 * (1.0 + a[r * p + r]);
    // Gaussian elimination with partial pivoting.
    for (std::size_t col = 0; col < p; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < p; ++r)
            if (std::abs(a[r * p + col]) > std::abs(a[piv * p + col])) piv = r;
        if (std::abs(a[piv * p + col]) < 1e-300) throw NumericalError("random-intercept start: singular design");
        if (piv != col) {
            for (std::size_t c = 0; c < p; ++c) std::swap(a[piv * p + c], a[col * p + c]);
            std::swap(rhs[piv], rhs[col]);
        }
        for (std::size_t r = col + 1; r < p; ++r) {
            const double f = a[r * p + col] / a[col * p + col];
            for (std::size_t c = col; c < p; ++c) a[r * p + c] -= f * a[col * p + c];
            rhs[r] -= f * rhs[col];
        }
    }
    std::vector<double> beta(p);
    for (std::size_t r = p; r-- > 0;) {
        double s = rhs[r];
        for (std::size_t c = r + 1; c < p; ++c) s -= a[r * p + c] * beta[c];
        beta[r] = s / a[r * p + r];
    }
    return beta;
}

MarginalPosterior fit_random_intercept(const MarkerData& data, const MarginalPrior& prior, const McmcConfig& config) {
    const std::size_t p = prior.locations.size();
    const std::size_t na = std::max<std::size_t>(data.num_athletes, 1);
    if (p > 0 && data.covariates.size() != data.size())
        throw ShapeError("random-intercept marginal needs a covariate row per observation");
    for (const auto& x : data.covariates)
        if (x.size() != p) throw ShapeError("covariate rows must match the number of coefficient priors");
    const std::size_t dim = p + 1 + 2 * na;
    const Prior& var_prior = *prior.intercept_variance;

    auto target = [&](std::span<const double> z) {
        const double sigma = std::exp(z[p]);
        double lp = prior_logpdf(prior.scales[0], sigma) + z[p];
        for (std::size_t j = 0; j < p; ++j) lp += prior_logpdf(prior.locations[j], z[j]);
        for (std::size_t a = 0; a < na; ++a) {
            const double lv = z[p + 1 + na + a];
            const double var = std::exp(lv);
            lp += prior_logpdf(var_prior, var) + lv;
            const double b = z[p + 1 + a];
            lp += -0.5 * b * b / var - 0.5 * lv - kLogSqrt2Pi;
        }
        if (!std::isfinite(lp)) return lp;
        double ss = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            double mu = z[p + 1 + data.athlete[i]];
            for (std::size_t j = 0; j < p; ++j) mu += data.covariates[i][j] * z[j];
            ss += (data.y[i] - mu) * (data.y[i] - mu);
        }
        const double n = static_cast<double>(data.size());
        return lp - n * (z[p] + kLogSqrt2Pi) - 0.5 * ss / (sigma * sigma);
    };

    std::vector<double> init(dim, 0.0), scales(dim, 0.0);
    const auto beta = p > 0 ? least_squares(data, p) : std::vector<double>{};
    std::vector<double> resid(data.size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        double mu = 0.0;
        for (std::size_t j = 0; j < p; ++j) mu += data.covariates[i][j] * beta[j];
        resid[i] = data.y[i] - mu;
    }
    const double sd = std::max(stats::sd(resid), 1e-3 * (1.0 + std::abs(stats::mean(data.y))));
    const double n = static_cast<double>(data.size());
    for (std::size_t j = 0; j < p; ++j) {
        init[j] = beta[j];
        scales[j] = 0.1 * sd / std::sqrt(n);
    }
    init[p] = std::log(sd);
    scales[p] = 1.0 / std::sqrt(2.0 * n);
    for (std::size_t a = 0; a < na; ++a) {
        scales[p + 1 + a] = sd / std::sqrt(std::max(1.0, n / static_cast<double>(na)));
        init[p + 1 + na + a] = std::log(0.25 * sd * sd);
        scales[p + 1 + na + a] = 0.5;
    }
    if (!std::isfinite(target(init))) {
        for (std::size_t a = 0; a < na; ++a) {
            if (const auto* hp = std::get_if<HalfTPrior>(&var_prior))
                init[p + 1 + na + a] = std::log(std::max(hp->location, hp->scale));
        }
        if (const auto* hp = std::get_if<HalfTPrior>(&prior.scales[0]))
            init[p] = std::log(std::max(hp->location, hp->scale));
    }

    McmcConfig cfg = config;
    if (cfg.proposal_scales.empty()) cfg.proposal_scales = scales;
    const auto res = rw_mh(target, init, cfg);

    MarginalPosterior out;
    out.acceptance = res.mean_acceptance();
    out.warnings = res.warnings;
    for (std::size_t i = 0; i < res.rows(); ++i) {
        const auto z = res.row(i);
        out.draws.push_back(MarginalModel::random_intercept(std::vector<double>(z.begin(), z.begin() + p), std::exp(z[p])));
        out.athlete_effects.emplace_back(z.begin() + p + 1, z.begin() + p + 1 + na);
    }
    return out;
}

MarginalModel posterior_centre(const std::vector<MarginalModel>& draws, std::span<const std::size_t> rows) {
    MarginalModel c = draws[rows[0]];
    const double inv = 1.0 / static_cast<double>(rows.size());
    for (auto& comp : c.components) comp = {0.0, 0.0, 0.0};
    for (auto& b : c.beta) b = 0.0;
    for (std::size_t r : rows) {
        const auto& d = draws[r];
        for (std::size_t k = 0; k < c.components.size(); ++k) {
            c.components[k].weight += inv * d.components[k].weight;
            c.components[k].mean += inv * d.components[k].mean;
            c.components[k].sd += inv * d.components[k].sd;
        }
        for (std::size_t j = 0; j < c.beta.size(); ++j) c.beta[j] += inv * d.beta[j];
    }
    double tot = 0.0;
    for (const auto& comp : c.components) tot += comp.weight;
    for (auto& comp : c.components) comp.weight /= tot;
    return c;
}

std::vector<double> mean_effects(const std::vector<std::vector<double>>& effects, std::span<const std::size_t> rows) {
    if (effects.empty()) return {};
    std::vector<double> m(effects[rows[0]].size(), 0.0);
    for (std::size_t r : rows)
        for (std::size_t a = 0; a < m.size(); ++a) m[a] += effects[r][a] / static_cast<double>(rows.size());
    return m;
}

double initial_theta(CopulaFamily family, std::span<const double> u, std::span<const double> v) {
    return copula_theta_from_tau(family, stats::kendall_tau(u, v));
}

}  // namespace

MarginalPosterior fit_marginal_posterior(const MarkerData& data, const MarginalPrior& prior, const McmcConfig& config) {
    if (data.size() == 0)
        throw PreconditionError("fit_marginal_posterior: no observations (use the prior predictive instead)");
    validate(prior);
    for (double y : data.y)
        if (!std::isfinite(y)) throw DomainError("fit_marginal_posterior: non-finite observation");
    if (prior.family == MarginalFamily::RandomInterceptLM) return fit_random_intercept(data, prior, config);
    if (!data.covariates.empty())
        throw ShapeError("covariates supplied to a " + to_string(prior.family) + " marginal");
    return fit_mixture(data, prior, config);
}

PseudoColumn pseudo_observations(const MarginalModel& draw, const MarkerData& data,
                                 std::span<const double> athlete_effects) {
    PseudoColumn col;
    col.u.resize(data.size());
    const bool ri = draw.family == MarginalFamily::RandomInterceptLM;
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::span<const double> x;
        double b = 0.0;
        if (ri) {
            if (!data.covariates.empty()) x = data.covariates[i];
            if (!athlete_effects.empty()) b = athlete_effects[data.athlete[i]];
        }
        double u = marginal_cdf(draw, data.y[i], x, b);
        if (u < kPitClamp) {
            u = kPitClamp;
            ++col.clamps;
        } else if (u > 1.0 - kPitClamp) {
            u = 1.0 - kPitClamp;
            ++col.clamps;
        }
        col.u[i] = u;
    }
    return col;
}

PseudoData generate_pseudo_data(const MarginalPosterior& posterior, const MarkerData& data) {
    PseudoData out;
    out.columns.reserve(posterior.size());
    for (std::size_t m = 0; m < posterior.size(); ++m) {
        std::span<const double> eff;
        if (!posterior.athlete_effects.empty()) eff = posterior.athlete_effects[m];
        auto col = pseudo_observations(posterior.draws[m], data, eff);
        out.clamps += col.clamps;
        out.columns.push_back(std::move(col.u));
    }
    return out;
}

ParamTransform copula_transform(CopulaFamily family) {
    switch (family) {
        case CopulaFamily::Clayton:
        case CopulaFamily::SurvClayton: return ParamTransform::positive(0.0);
        case CopulaFamily::Gaussian: return ParamTransform::interval(-1.0, 1.0);
        default: return ParamTransform::identity();
    }
}

double copula_theta_from_tau(CopulaFamily family, double tau) {
    switch (family) {
        case CopulaFamily::Clayton:
        case CopulaFamily::SurvClayton: {
            const double t = std::clamp(tau, 0.02, 0.95);
            return 2.0 * t / (1.0 - t);
        }
        case CopulaFamily::Gaussian: return std::clamp(std::sin(0.5 * std::numbers::pi * tau), -0.98, 0.98);
        case CopulaFamily::Frank: {
            const double t = std::clamp(tau, -0.9, 0.9);
            if (std::abs(t) < 1e-3) return t < 0.0 ? -0.01 : 0.01;
            double lo = t > 0.0 ? 1e-4 : -200.0, hi = t > 0.0 ? 200.0 : -1e-4;
            for (int i = 0; i < 100; ++i) {
                const double mid = 0.5 * (lo + hi);
                (kendall_tau({CopulaFamily::Frank, mid}) < t ? lo : hi) = mid;
            }
            return 0.5 * (lo + hi);
        }
        case CopulaFamily::Independence: return 0.0;
    }
    return 0.0;
}

CopulaFit fit_copula_posterior(std::span<const double> u, std::span<const double> v, CopulaFamily family,
                               const Prior& prior, const CopulaChainConfig& config) {
    if (u.size() != v.size()) throw ShapeError("fit_copula_posterior: pseudo-observation columns differ in length");
    if (u.empty()) throw PreconditionError("fit_copula_posterior: no pseudo-observations");
    for (std::size_t i = 0; i < u.size(); ++i)
        if (!(u[i] > 0.0 && u[i] < 1.0 && v[i] > 0.0 && v[i] < 1.0))
            throw DomainError("fit_copula_posterior: pseudo-observations must lie in (0, 1)^2");
    if (family == CopulaFamily::Independence) return {0.0, 1.0};

    const CopulaLogLikelihood loglik(family, u, v);
    auto target = [&](std::span<const double> x) {
        const double lp = prior_logpdf(prior, x[0]);
        if (!std::isfinite(lp)) return lp;
        return lp + loglik(x[0]);
    };
    double init = std::isnan(config.init) ? initial_theta(family, u, v) : config.init;
    std::array<double, 1> x0{init};
    if (!std::isfinite(target(x0))) {
        if (const auto* np = std::get_if<NormalPrior>(&prior)) {
            x0[0] = std::clamp(np->mean, np->lower, np->upper);
            if (!std::isfinite(target(x0))) x0[0] = copula_theta_from_tau(family, 0.3);
        }
    }

    McmcConfig cfg;
    cfg.chains = 1;
    cfg.burn_in = config.burn_in;
    cfg.chain_length = config.burn_in + config.steps;
    cfg.thinning = config.steps;
    cfg.proposal_scales = {config.proposal_scale};
    cfg.seed = config.seed;
    cfg.adapt = config.adapt;
    const std::array<ParamTransform, 1> tr{copula_transform(family)};
    const auto res = rw_mh(target, x0, cfg, tr);
    return {res.draws.back(), res.acceptance.front()};
}

void validate(const PosteriorDraws& d) {
    const std::size_t m = d.theta.size();
    if (d.hgb.size() != m || d.offs.size() != m) throw ShapeError("posterior draws: rows are not aligned");
    if (!d.hgb_effects.empty() && d.hgb_effects.size() != m) throw ShapeError("posterior draws: hgb effects misaligned");
    if (!d.offs_effects.empty() && d.offs_effects.size() != m)
        throw ShapeError("posterior draws: offs effects misaligned");
    for (std::size_t i = 0; i < m; ++i) {
        validate(d.hgb[i]);
        validate(d.offs[i]);
        if (d.copula_family != CopulaFamily::Independence) validate(d.copula(i));
    }
}

PosteriorDraws bayesian_ifm_copula_stage(std::span<const BiomarkerReading> readings, const MarginalPosterior& hgb,
                                         const MarginalPosterior& offs, const IfmConfig& config) {
    if (hgb.size() != offs.size()) throw ShapeError("bayesian_ifm: marker posteriors have different draw counts");
    if (hgb.size() == 0) throw PreconditionError("bayesian_ifm: no marginal draws");
    const auto data_h = MarkerData::from_readings(readings, Marker::Hgb);
    const auto data_o = MarkerData::from_readings(readings, Marker::Offs);
    const CopulaFamily family = config.priors.copula_family;

    std::vector<std::size_t> rows;
    const std::size_t total = hgb.size();
    const std::size_t keep = config.max_rows > 0 ? std::min(config.max_rows, total) : total;
    rows.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) rows.push_back(i * total / keep);

    PosteriorDraws out;
    out.copula_family = family;
    out.marginal_acceptance = 0.5 * (hgb.acceptance + offs.acceptance);
    out.warnings = hgb.warnings;
    out.warnings.insert(out.warnings.end(), offs.warnings.begin(), offs.warnings.end());
    for (std::size_t r : rows) {
        out.hgb.push_back(hgb.draws[r]);
        out.offs.push_back(offs.draws[r]);
        if (!hgb.athlete_effects.empty()) out.hgb_effects.push_back(hgb.athlete_effects[r]);
        if (!offs.athlete_effects.empty()) out.offs_effects.push_back(offs.athlete_effects[r]);
    }
    out.theta.assign(keep, 0.0);
    if (family == CopulaFamily::Independence) {
        out.copula_acceptance = 1.0;
        out.theta_ess = static_cast<double>(keep);
        return out;
    }

    // Pilot chain at the posterior-mean marginals.
    const auto centre_h = posterior_centre(hgb.draws, rows);
    const auto centre_o = posterior_centre(offs.draws, rows);
    const auto eff_h = mean_effects(hgb.athlete_effects, rows);
    const auto eff_o = mean_effects(offs.athlete_effects, rows);
    const auto pu = pseudo_observations(centre_h, data_h, eff_h);
    const auto pv = pseudo_observations(centre_o, data_o, eff_o);

    const CopulaLogLikelihood pilot_ll(family, pu.u, pv.u);
    const Prior& prior = config.priors.copula;
    auto pilot_target = [&](std::span<const double> x) {
        const double lp = prior_logpdf(prior, x[0]);
        return std::isfinite(lp) ? lp + pilot_ll(x[0]) : lp;
    };
    std::array<double, 1> x0{std::isnan(config.copula.init) ? initial_theta(family, pu.u, pv.u) : config.copula.init};
    if (!std::isfinite(pilot_target(x0))) {
        if (const auto* np = std::get_if<NormalPrior>(&prior)) x0[0] = std::clamp(np->mean, np->lower, np->upper);
    }
    McmcConfig pilot;
    pilot.chains = 1;
    pilot.chain_length = std::max<std::size_t>(config.pilot_length, 200);
    pilot.burn_in = pilot.chain_length / 2;
    pilot.thinning = 1;
    pilot.proposal_scales = {config.copula.proposal_scale};
    pilot.seed = derive_seed(config.seed, 3);
    const std::array<ParamTransform, 1> tr{copula_transform(family)};
    const auto pres = rw_mh(pilot_target, x0, pilot, tr);
    std::vector<double> free(pres.rows());
    for (std::size_t i = 0; i < free.size(); ++i) free[i] = tr[0].to_free(pres.draws[i]);
    const double free_mean = stats::mean(free);
    const double free_sd = stats::sd(free);

    CopulaChainConfig row_cfg = config.copula;
    row_cfg.init = tr[0].from_free(free_mean);
    if (free_sd > 0.0) row_cfg.proposal_scale = 2.4 * free_sd;

    std::vector<double> acc(keep, 0.0);
    std::vector<std::size_t> clamps(keep, 0);
    parallel_for(keep, config.threads, [&](std::size_t i) {
        const std::size_t r = rows[i];
        std::span<const double> eh, eo;
        if (!hgb.athlete_effects.empty()) eh = hgb.athlete_effects[r];
        if (!offs.athlete_effects.empty()) eo = offs.athlete_effects[r];
        const auto cu = pseudo_observations(hgb.draws[r], data_h, eh);
        const auto cv = pseudo_observations(offs.draws[r], data_o, eo);
        CopulaChainConfig c = row_cfg;
        c.seed = derive_seed(config.seed, 4, i);
        const auto fit = fit_copula_posterior(cu.u, cv.u, family, prior, c);
        out.theta[i] = fit.theta;
        acc[i] = fit.acceptance;
        clamps[i] = cu.clamps + cv.clamps;
    });
    out.clamp_count = std::accumulate(clamps.begin(), clamps.end(), std::size_t{0});
    out.copula_acceptance = stats::mean(acc);
    out.theta_ess = stats::effective_sample_size(out.theta);
    if (out.copula_acceptance <= 0.05 || out.copula_acceptance >= 0.95) {
        std::ostringstream msg;
        msg << "copula chains: mean acceptance " << out.copula_acceptance << " outside (0.05, 0.95)";
        out.warnings.push_back(msg.str());
    }
    return out;
}

PosteriorDraws bayesian_ifm(std::span<const BiomarkerReading> readings, const IfmConfig& config) {
    if (readings.empty()) throw PreconditionError("bayesian_ifm: no readings");
    validate(readings);
    validate(config.priors);
    const auto data_h = MarkerData::from_readings(readings, Marker::Hgb);
    const auto data_o = MarkerData::from_readings(readings, Marker::Offs);
    McmcConfig mh = config.marginal_mcmc;
    mh.seed = derive_seed(config.seed, 1);
    McmcConfig mo = config.marginal_mcmc;
    mo.seed = derive_seed(config.seed, 2);
    const auto post_h = fit_marginal_posterior(data_h, config.priors.hgb, mh);
    const auto post_o = fit_marginal_posterior(data_o, config.priors.offs, mo);
    return bayesian_ifm_copula_stage(readings, post_h, post_o, config);
}

Prior copula_prior(CopulaFamily family, double mean, double sd) {
    switch (family) {
        case CopulaFamily::Clayton:
        case CopulaFamily::SurvClayton: return NormalPrior{mean, sd, 0.0, std::numeric_limits<double>::infinity()};
        case CopulaFamily::Gaussian: return NormalPrior{mean, sd, -1.0, 1.0};
        case CopulaFamily::Frank: return NormalPrior{mean, sd};
        case CopulaFamily::Independence: return PointMassPrior{0.0};
    }
    return PointMassPrior{0.0};
}

PriorSpec default_priors(std::span<const BiomarkerReading> readings, MarginalFamily hgb_family,
                         MarginalFamily offs_family, std::size_t offs_components, CopulaFamily copula_family) {
    if (readings.empty()) throw PreconditionError("default_priors: no readings");
    auto marker_prior = [](const std::vector<double>& y, MarginalFamily family, std::size_t k) {
        const double m = stats::mean(y);
        const double s = std::max(stats::sd(y), 1e-3 * (1.0 + std::abs(m)));
        MarginalPrior p;
        p.family = family;
        if (family == MarginalFamily::Gaussian) k = 1;
        if (family == MarginalFamily::RandomInterceptLM) {
            p.scales = {HalfTPrior{3.0, 0.0, 5.0 * s}};
            p.intercept_variance = HalfTPrior{3.0, 0.0, s * s};
            return p;
        }
        for (std::size_t j = 0; j < k; ++j) {
            p.locations.push_back(NormalPrior{m, 10.0 * s});
            p.scales.push_back(HalfTPrior{3.0, 0.0, 5.0 * s});
        }
        if (k > 1) p.weights = DirichletPrior{std::vector<double>(k, 1.0)};
        return p;
    };
    std::vector<double> h, o;
    for (const auto& r : readings) {
        h.push_back(r.hgb);
        o.push_back(r.offs);
    }
    PriorSpec spec;
    spec.hgb = marker_prior(h, hgb_family, 1);
    spec.offs = marker_prior(o, offs_family, offs_components);
    if (!readings.front().covariates.empty()) {
        const std::size_t p = readings.front().covariates.size();
        for (auto* mp : {&spec.hgb, &spec.offs})
            if (mp->family == MarginalFamily::RandomInterceptLM)
                mp->locations.assign(p, NormalPrior{0.0, 100.0});
    }
    spec.copula_family = copula_family;
    spec.copula = copula_prior(copula_family, 0.0, 10.0);
    return spec;
}

ParameterTable parameter_table(const PosteriorDraws& d) {
    ParameterTable t;
    auto add = [&](const std::string& name, auto&& get) {
        std::vector<double> col(d.size());
        for (std::size_t m = 0; m < d.size(); ++m) col[m] = get(m);
        t.names.push_back(name);
        t.columns.push_back(std::move(col));
    };
    auto marker = [&](const std::vector<MarginalModel>& draws, const std::string& tag) {
        if (draws.empty()) return;
        const auto& first = draws.front();
        if (first.family == MarginalFamily::RandomInterceptLM) {
            for (std::size_t j = 0; j < first.beta.size(); ++j)
                add("beta_" + tag + "_" + std::to_string(j + 1), [&](std::size_t m) { return draws[m].beta[j]; });
            add("sigma_" + tag, [&](std::size_t m) { return draws[m].components[0].sd; });
            return;
        }
        const std::size_t k = first.components.size();
        auto suffix = [&](std::size_t j) { return k == 1 ? std::string() : "_" + std::to_string(j + 1); };
        for (std::size_t j = 0; j < k; ++j)
            add("mu_" + tag + suffix(j), [&](std::size_t m) { return draws[m].components[j].mean; });
        for (std::size_t j = 0; j < k; ++j)
            add("sigma_" + tag + suffix(j), [&](std::size_t m) { return draws[m].components[j].sd; });
        if (k > 1)
            for (std::size_t j = 0; j < k; ++j)
                add("w_" + tag + suffix(j), [&](std::size_t m) { return draws[m].components[j].weight; });
    };
    marker(d.hgb, "hgb");
    marker(d.offs, "offs");
    add("theta_cop", [&](std::size_t m) { return d.theta[m]; });
    return t;
}

DerivedPriors derive_priors(const PosteriorDraws& draws, const DerivePriorsConfig& config) {
    if (draws.size() == 0) throw PreconditionError("derive_priors: no posterior draws");
    DerivedPriors out;
    if (draws.size() < 100) {
        out.warnings.push_back("derive_priors: only " + std::to_string(draws.size()) +
                               " draws; kernel-mode MAP estimates may be unstable");
    }
    const auto table = parameter_table(draws);
    auto summarize = [&](const std::string& name) {
        const auto it = std::find(table.names.begin(), table.names.end(), name);
        const auto& col = table.columns[static_cast<std::size_t>(it - table.names.begin())];
        const double sd = stats::sd(col);
        // Rounding leaves a tiny nonzero sd on constant columns.
        if (!(sd > 1e-12 * std::max(1.0, std::abs(stats::mean(col)))))
            throw PreconditionError("derive_priors: posterior draws of " + name + " have zero spread");
        ParameterSummary s{name, stats::kde_mode(col), sd};
        out.summary.push_back(s);
        return s;
    };
    auto build = [&](const std::vector<MarginalModel>& d, const std::string& tag, const std::vector<double>& dfs) {
        MarginalPrior p;
        const auto& first = d.front();
        p.family = first.family;
        auto df = [&](std::size_t j) { return j < dfs.size() ? dfs[j] : config.default_scale_df; };
        if (first.family == MarginalFamily::RandomInterceptLM) {
            for (std::size_t j = 0; j < first.beta.size(); ++j) {
                const auto s = summarize("beta_" + tag + "_" + std::to_string(j + 1));
                p.locations.push_back(NormalPrior{s.map, s.sd});
            }
            const auto s = summarize("sigma_" + tag);
            p.scales.push_back(HalfTPrior{df(0), s.map, s.sd});
            p.intercept_variance = config.intercept_variance;
            return p;
        }
        const std::size_t k = first.components.size();
        auto suffix = [&](std::size_t j) { return k == 1 ? std::string() : "_" + std::to_string(j + 1); };
        for (std::size_t j = 0; j < k; ++j) {
            const auto s = summarize("mu_" + tag + suffix(j));
            p.locations.push_back(NormalPrior{s.map, s.sd});
        }
        for (std::size_t j = 0; j < k; ++j) {
            const auto s = summarize("sigma_" + tag + suffix(j));
            p.scales.push_back(HalfTPrior{df(j), s.map, s.sd});
        }
        if (k > 1) {
            for (std::size_t j = 0; j < k; ++j) summarize("w_" + tag + suffix(j));
            if (config.weight_concentration.size() != k)
                throw ConfigError("derive_priors: " + std::to_string(config.weight_concentration.size()) +
                                  " dirichlet concentrations configured for a " + std::to_string(k) +
                                  "-component mixture");
            p.weights = DirichletPrior{config.weight_concentration};
        }
        return p;
    };
    out.spec.hgb = build(draws.hgb, "hgb", config.hgb_scale_df);
    out.spec.offs = build(draws.offs, "offs", config.offs_scale_df);
    out.spec.copula_family = draws.copula_family;
    if (draws.copula_family == CopulaFamily::Independence) {
        out.spec.copula = PointMassPrior{0.0};
    } else {
        const auto s = summarize("theta_cop");
        out.spec.copula = copula_prior(draws.copula_family, s.map, s.sd);
    }
    validate(out.spec);
    return out;
}

}  // namespace copadapt
