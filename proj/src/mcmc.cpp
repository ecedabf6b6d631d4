#include "copadapt/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "copadapt/errors.hpp"
#include "copadapt/random.hpp"

namespace copadapt {

double ParamTransform::to_free(double x) const {
    switch (kind) {
        case Kind::Identity: return x;
        case Kind::Log: return std::log(x - lower);
        case Kind::Interval: {
            const double t = (x - lower) / (upper - lower);
            return std::log(t) - std::log1p(-t);
        }
    }
    return x;
}

double ParamTransform::from_free(double z) const {
    switch (kind) {
        case Kind::Identity: return z;
        case Kind::Log: return lower + std::exp(z);
        case Kind::Interval: {
            const double t = 1.0 / (1.0 + std::exp(-z));
            return lower + (upper - lower) * t;
        }
    }
    return z;
}

double ParamTransform::log_jacobian(double z) const {
    switch (kind) {
        case Kind::Identity: return 0.0;
        case Kind::Log: return z;
        case Kind::Interval: {
            // log t + log(1 - t) with t = logistic(z), written stably.
            const double a = std::abs(z);
            return std::log(upper - lower) - a - 2.0 * std::log1p(std::exp(-a));
        }
    }
    return 0.0;
}

std::size_t McmcConfig::retained_per_chain() const {
    if (thinning == 0 || chain_length <= burn_in) return 0;
    return (chain_length - burn_in) / thinning;
}

void validate(const McmcConfig& c) {
    if (c.chains == 0) throw ConfigError("mcmc: chains must be >= 1");
    if (c.burn_in >= c.chain_length) throw ConfigError("mcmc: burn_in must be smaller than chain_length");
    if (c.thinning == 0) throw ConfigError("mcmc: thinning must be >= 1");
    if (c.retained_per_chain() == 0) throw ConfigError("mcmc: configuration retains no draws");
    for (double s : c.proposal_scales)
        if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("mcmc: proposal scales must be positive");
    if (!(c.target_acceptance > 0.0 && c.target_acceptance < 1.0))
        throw ConfigError("mcmc: target acceptance must lie in (0, 1)");
}

std::vector<double> McmcResult::column(std::size_t j) const {
    std::vector<double> out(rows());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = draws[i * dim + j];
    return out;
}

double McmcResult::mean_acceptance() const {
    if (acceptance.empty()) return 0.0;
    return std::accumulate(acceptance.begin(), acceptance.end(), 0.0) / static_cast<double>(acceptance.size());
}

namespace {

// Lower Cholesky factor of a small dense SPD matrix; false if not SPD.
bool cholesky(const std::vector<double>& a, std::size_t d, std::vector<double>& l) {
    l.assign(d * d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double s = a[i * d + j];
            for (std::size_t k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
            if (i == j) {
                if (!(s > 0.0)) return false;
                l[i * d + i] = std::sqrt(s);
            } else {
                l[i * d + j] = s / l[j * d + j];
            }
        }
    }
    return true;
}

struct Chain {
    const LogTarget& target;
    std::span<const ParamTransform> tr;
    std::size_t d;

    double eval(const std::vector<double>& z, std::vector<double>& x) const {
        double jac = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (tr.empty()) {
                x[j] = z[j];
            } else {
                x[j] = tr[j].from_free(z[j]);
                jac += tr[j].log_jacobian(z[j]);
            }
        }
        const double lp = target(std::span<const double>(x));
        if (std::isnan(lp)) {
            std::ostringstream msg;
            msg << "log target returned NaN at (";
            for (std::size_t j = 0; j < d; ++j) msg << (j ? ", " : "") << x[j];
            msg << ")";
            throw NumericalError(msg.str());
        }
        return lp + jac;
    }
};

}  // namespace

McmcResult rw_mh(const LogTarget& log_target, std::span<const double> init, const McmcConfig& config,
                 std::span<const ParamTransform> transforms) {
    validate(config);
    const std::size_t d = init.size();
    if (d == 0) throw PreconditionError("rw_mh: empty initial state");
    if (!transforms.empty() && transforms.size() != d) throw ShapeError("rw_mh: one transform per coordinate required");
    if (!config.proposal_scales.empty() && config.proposal_scales.size() != d)
        throw ShapeError("rw_mh: one proposal scale per coordinate required");

    Chain chain{log_target, transforms, d};
    std::vector<double> z0(d), x(d);
    for (std::size_t j = 0; j < d; ++j) z0[j] = transforms.empty() ? init[j] : transforms[j].to_free(init[j]);
    const double lp0 = chain.eval(z0, x);
    if (!std::isfinite(lp0)) throw PreconditionError("rw_mh: log target is not finite at the initial state");

    McmcResult result;
    result.dim = d;
    const std::size_t keep = config.retained_per_chain();
    result.draws.reserve(config.chains * keep * d);

    for (std::size_t c = 0; c < config.chains; ++c) {
        Rng rng(derive_seed(config.seed, c));
        std::vector<double> z = z0, prop(d), noise(d);
        double lp = lp0;

        // Proposal: z + scale * L * e, with L the Cholesky factor of the
        // proposal covariance (diagonal until enough burn-in history).
        std::vector<double> chol(d * d, 0.0);
        for (std::size_t j = 0; j < d; ++j)
            chol[j * d + j] = config.proposal_scales.empty() ? 0.1 : config.proposal_scales[j];
        double log_scale = 0.0;

        std::vector<double> run_mean(d, 0.0), run_cov(d * d, 0.0);
        std::size_t hist = 0;
        bool have_cov = false;
        const std::size_t cov_start = config.burn_in / 4;
        std::size_t accepted = 0, post = 0;

        for (std::size_t t = 0; t < config.chain_length; ++t) {
            const double s = std::exp(log_scale);
            for (std::size_t j = 0; j < d; ++j) noise[j] = standard_normal(rng);
            for (std::size_t i = 0; i < d; ++i) {
                double step = 0.0;
                for (std::size_t k = 0; k <= i; ++k) step += chol[i * d + k] * noise[k];
                prop[i] = z[i] + s * step;
            }
            const double lp_prop = chain.eval(prop, x);
            const double log_u = std::log(uniform01(rng));
            const bool accept = lp_prop - lp > log_u;
            if (accept) {
                z.swap(prop);
                lp = lp_prop;
            }

            if (t < config.burn_in) {
                if (config.adapt) {
                    const double gamma = 1.0 / std::pow(static_cast<double>(t) + 1.0, 0.6);
                    log_scale += gamma * ((accept ? 1.0 : 0.0) - config.target_acceptance);
                    log_scale = std::clamp(log_scale, -30.0, 30.0);
                    if (t >= cov_start) {
                        ++hist;
                        const double w = 1.0 / static_cast<double>(hist);
                        for (std::size_t i = 0; i < d; ++i) noise[i] = z[i] - run_mean[i];
                        for (std::size_t i = 0; i < d; ++i) run_mean[i] += w * noise[i];
                        for (std::size_t i = 0; i < d; ++i)
                            for (std::size_t k = 0; k < d; ++k)
                                run_cov[i * d + k] += w * ((1.0 - w) * noise[i] * noise[k] - run_cov[i * d + k]);
                        if (hist >= 20 * d + 50 && hist % 100 == 0) {
                            // Haario-style refresh with the 2.38^2/d scaling folded
                            // into the global multiplier.
                            std::vector<double> cov = run_cov, next;
                            double tr_mean = 0.0;
                            for (std::size_t i = 0; i < d; ++i) tr_mean += cov[i * d + i];
                            tr_mean /= static_cast<double>(d);
                            for (std::size_t i = 0; i < d; ++i) cov[i * d + i] += 1e-10 * tr_mean + 1e-300;
                            for (double& v : cov) v *= 5.6644 / static_cast<double>(d);
                            if (cholesky(cov, d, next)) {
                                chol.swap(next);
                                if (!have_cov) log_scale = 0.0;
                                have_cov = true;
                            }
                        }
                    }
                }
                continue;
            }
            ++post;
            if (accept) ++accepted;
            if ((t - config.burn_in + 1) % config.thinning == 0) {
                for (std::size_t j = 0; j < d; ++j)
                    result.draws.push_back(transforms.empty() ? z[j] : transforms[j].from_free(z[j]));
            }
        }
        const double rate = post ? static_cast<double>(accepted) / static_cast<double>(post) : 0.0;
        result.acceptance.push_back(rate);
        result.final_scale.push_back(std::exp(log_scale));
        if (rate <= 0.05 || rate >= 0.95) {
            std::ostringstream msg;
            msg << "chain " << c << " acceptance rate " << rate << " outside (0.05, 0.95)";
            result.warnings.push_back(msg.str());
        }
    }
    return result;
}

}  // namespace copadapt
