#include "copadapt/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <mutex>

#include "copadapt/errors.hpp"
#include "copadapt/parallel.hpp"
#include "copadapt/random.hpp"
#include "copadapt/stats.hpp"

namespace copadapt {

namespace {

struct FrameworkName {
    FrameworkId id;
    const char* name;
};

constexpr FrameworkName kNames[] = {
    {FrameworkId::Uni, "Uni"},
    {FrameworkId::HybGauss, "HybGauss"},
    {FrameworkId::HybClayCop, "HybClayCop"},
    {FrameworkId::MvtGauss, "MvtGauss"},
    {FrameworkId::MvtFrankCop, "MvtFrankCop"},
    {FrameworkId::MvtClayCop, "MvtClayCop"},
};

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::uint64_t family_code(MarginalFamily family, std::size_t components) {
    return static_cast<std::uint64_t>(family) * 64 + components;
}

std::string marginal_key(MarginalFamily family, std::size_t components, Marker marker) {
    return std::to_string(static_cast<int>(marker)) + ":" + std::to_string(family_code(family, components));
}

IfmConfig ifm_config(const FrameworkSpec& spec, std::span<const BiomarkerReading> data, const PipelineConfig& config,
                     std::uint64_t seed) {
    IfmConfig ifm;
    ifm.priors = default_priors(data, spec.hgb_family, spec.offs_family, spec.offs_components, spec.copula);
    ifm.marginal_mcmc = config.marginal_mcmc;
    ifm.copula = config.copula;
    ifm.pilot_length = config.pilot_length;
    ifm.max_rows = config.posterior_rows;
    ifm.threads = config.threads;
    ifm.seed = seed;
    return ifm;
}

AggregateCell aggregate(const std::vector<double>& values) {
    AggregateCell c;
    c.count = values.size();
    if (values.empty()) return c;
    c.mean = stats::mean(values);
    c.sd = values.size() > 1 ? stats::sd(values) : 0.0;
    return c;
}

}  // namespace

std::string to_string(FrameworkId id) {
    for (const auto& n : kNames)
        if (n.id == id) return n.name;
    throw ConfigError("unknown framework id");
}

FrameworkId parse_framework(std::string_view name) {
    const auto key = lower(name);
    for (const auto& n : kNames)
        if (lower(n.name) == key) return n.id;
    throw ConfigError("unknown framework '" + std::string(name) +
                      "' (expected Uni|HybGauss|HybClayCop|MvtGauss|MvtFrankCop|MvtClayCop)");
}

const std::vector<FrameworkId>& all_frameworks() {
    static const std::vector<FrameworkId> all{FrameworkId::Uni,      FrameworkId::HybGauss,    FrameworkId::HybClayCop,
                                              FrameworkId::MvtGauss, FrameworkId::MvtFrankCop, FrameworkId::MvtClayCop};
    return all;
}

FrameworkSpec framework_spec(FrameworkId id) {
    FrameworkSpec s;
    switch (id) {
        case FrameworkId::Uni:
            s.copula = CopulaFamily::Independence;
            s.joint_region = false;
            break;
        case FrameworkId::HybGauss:
            s.offs_family = MarginalFamily::Gaussian;
            s.offs_components = 1;
            s.copula = CopulaFamily::Gaussian;
            s.joint_region = false;
            break;
        case FrameworkId::HybClayCop:
            s.joint_region = false;
            break;
        case FrameworkId::MvtGauss:
            s.offs_family = MarginalFamily::Gaussian;
            s.offs_components = 1;
            s.copula = CopulaFamily::Gaussian;
            break;
        case FrameworkId::MvtFrankCop:
            s.copula = CopulaFamily::Frank;
            break;
        case FrameworkId::MvtClayCop:
            break;
    }
    return s;
}

void validate(const PipelineConfig& config) {
    validate(config.marginal_mcmc);
    if (config.copula.steps == 0) throw ConfigError("copula chain needs at least one step");
    if (config.predictive_draws < kMinNonparametricSample)
        throw ConfigError("predictive_draws must be >= " + std::to_string(kMinNonparametricSample));
    if (config.threads == 0) throw ConfigError("threads must be >= 1");
    if (!(config.np.copula_bandwidth_scale > 0.0)) throw ConfigError("copula_bandwidth_scale must be positive");
}

const MarginalPosterior& FitCache::marginal(MarginalFamily family, std::size_t components, Marker marker,
                                            std::span<const BiomarkerReading> data, const PipelineConfig& config,
                                            std::uint64_t seed) {
    const auto key = marginal_key(family, components, marker);
    if (auto it = marginals_.find(key); it != marginals_.end()) return it->second;
    FrameworkSpec spec;
    spec.hgb_family = family;
    spec.offs_family = family;
    spec.offs_components = components;
    const auto priors = default_priors(data, spec.hgb_family, spec.offs_family, components, CopulaFamily::Independence);
    McmcConfig mh = config.marginal_mcmc;
    mh.seed = derive_seed(seed, 10 + static_cast<std::uint64_t>(marker), family_code(family, components));
    const auto md = MarkerData::from_readings(data, marker);
    auto post = fit_marginal_posterior(md, marker == Marker::Hgb ? priors.hgb : priors.offs, mh);
    return marginals_.emplace(key, std::move(post)).first->second;
}

const PosteriorDraws& FitCache::joint(const FrameworkSpec& spec, std::span<const BiomarkerReading> data,
                                      const PipelineConfig& config, std::uint64_t seed) {
    const auto kh = marginal_key(spec.hgb_family, 1, Marker::Hgb);
    const auto ko = marginal_key(spec.offs_family, spec.offs_components, Marker::Offs);
    const auto key = kh + "|" + ko + "|" + to_string(spec.copula);
    if (auto it = joints_.find(key); it != joints_.end()) return it->second;
    const auto& ph = marginal(spec.hgb_family, 1, Marker::Hgb, data, config, seed);
    const auto& po = marginal(spec.offs_family, spec.offs_components, Marker::Offs, data, config, seed);
    const std::uint64_t code = family_code(spec.hgb_family, 1) * 4096 +
                               family_code(spec.offs_family, spec.offs_components) * 16 +
                               static_cast<std::uint64_t>(spec.copula);
    const auto ifm = ifm_config(spec, data, config, derive_seed(seed, 20, code));
    auto draws = bayesian_ifm_copula_stage(data, ph, po, ifm);
    return joints_.emplace(key, std::move(draws)).first->second;
}

FittedFramework fit_framework(FrameworkId id, std::span<const BiomarkerReading> historical,
                              const PipelineConfig& config, std::uint64_t seed, FitCache* cache) {
    if (historical.empty()) throw PreconditionError("fit_framework: no historical readings");
    validate(historical);
    validate(config);
    FitCache local;
    FitCache& c = cache ? *cache : local;

    FittedFramework fit;
    fit.id = id;
    fit.spec = framework_spec(id);
    const auto& draws = c.joint(fit.spec, historical, config, seed);
    fit.priors = derive_priors(draws, config.derive);
    fit.sample = predictive_sample(fit.priors.spec, config.predictive_draws,
                                   derive_seed(seed, 30, static_cast<std::uint64_t>(id)));
    if (fit.spec.joint_region) {
        fit.measure = make_copula_np_measure(fit.sample, config.np);
        fit.sample_values.resize(fit.sample.size());
        for (std::size_t i = 0; i < fit.sample.size(); ++i)
            fit.sample_values[i] = (*fit.measure)(fit.sample.hgb[i], fit.sample.offs[i]);
    } else {
        fit.hgb_measure = make_kde_measure(fit.sample.hgb);
        fit.offs_measure = make_kde_measure(fit.sample.offs);
    }
    return fit;
}

FrameworkRegion build_region(const FittedFramework& fit, double alpha) {
    FrameworkRegion r;
    r.id = fit.id;
    r.alpha = alpha;
    if (fit.spec.joint_region) {
        if (fit.sample_values.size() != fit.sample.size())
            throw PreconditionError("build_region: joint framework without measure values");
        r.joint = estimate_hpr_from_values(fit.sample_values, alpha, MeasureKind::CopulaNonparametric, 2);
        r.sample_miscoverage = r.joint->sample_miscoverage();
        return r;
    }
    if (!fit.hgb_measure || !fit.offs_measure) throw PreconditionError("build_region: univariate measures missing");
    r.hgb = univariate_region(fit.sample.hgb, *fit.hgb_measure, alpha);
    r.offs = univariate_region(fit.sample.offs, *fit.offs_measure, alpha);
    std::size_t flagged = 0;
    for (std::size_t i = 0; i < fit.sample.size(); ++i)
        if (joint_flag_univariate(fit.sample.point(i), *r.hgb, *r.offs)) ++flagged;
    r.sample_miscoverage = static_cast<double>(flagged) / static_cast<double>(fit.sample.size());
    return r;
}

std::vector<double> measure_values(const FittedFramework& fit, std::span<const Point2> points) {
    if (!fit.measure) return {};
    std::vector<double> out(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) out[i] = (*fit.measure)(points[i][0], points[i][1]);
    return out;
}

std::vector<std::uint8_t> flag_points(const FrameworkRegion& region, std::span<const Point2> points,
                                      std::span<const double> values) {
    std::vector<std::uint8_t> out(points.size());
    if (region.joint) {
        if (values.size() != points.size()) throw ShapeError("flag_points: need one measure value per point");
        for (std::size_t i = 0; i < points.size(); ++i) out[i] = region.joint->contains_value(values[i]) ? 0 : 1;
        return out;
    }
    if (!region.hgb || !region.offs) throw PreconditionError("flag_points: empty region");
    for (std::size_t i = 0; i < points.size(); ++i)
        out[i] = joint_flag_univariate(points[i], *region.hgb, *region.offs) ? 1 : 0;
    return out;
}

TestSet make_test_set(const ScenarioParams& truth, std::size_t n, std::span<const double> alphas,
                      std::size_t oracle_draws, std::uint64_t seed) {
    if (n == 0) throw PreconditionError("make_test_set: need at least one test point");
    const auto joint = truth.joint();
    TestSet t;
    t.points = joint.sample(n, derive_seed(seed, 1));
    t.alphas.assign(alphas.begin(), alphas.end());
    std::vector<double> dens(n);
    for (std::size_t i = 0; i < n; ++i) dens[i] = joint.density(t.points[i][0], t.points[i][1]);
    for (double a : alphas) {
        // Same oracle sample for every alpha, so the true regions are nested.
        const double p = true_region_oracle(joint, a, oracle_draws, derive_seed(seed, 2));
        t.thresholds.push_back(p);
        std::vector<std::uint8_t> flags(n);
        for (std::size_t i = 0; i < n; ++i) flags[i] = dens[i] < p ? 1 : 0;
        t.atypical.push_back(std::move(flags));
    }
    return t;
}

std::vector<FrameworkOutcome> run_framework(FrameworkId id, std::span<const BiomarkerReading> historical,
                                            const TestSet& test, const PipelineConfig& config, std::uint64_t seed,
                                            MetricsMode mode, FitCache* cache) {
    if (test.alphas.size() != test.atypical.size()) throw ShapeError("run_framework: malformed test set");
    const auto fit = fit_framework(id, historical, config, seed, cache);
    const auto values = measure_values(fit, test.points);
    std::vector<FrameworkOutcome> out;
    for (std::size_t a = 0; a < test.alphas.size(); ++a) {
        FrameworkOutcome o;
        o.id = id;
        o.alpha = test.alphas[a];
        o.region = build_region(fit, o.alpha);
        const auto flags = flag_points(o.region, test.points, values);
        o.counts = confusion_counts(test.atypical[a], flags, mode);
        o.metrics = classification_metrics(o.counts);
        o.metrics.miscoverage = o.region.sample_miscoverage;
        const auto n_flag = std::count(flags.begin(), flags.end(), std::uint8_t{1});
        o.metrics.miscoverage_true_law = static_cast<double>(n_flag) / static_cast<double>(flags.size());
        out.push_back(std::move(o));
    }
    return out;
}

void validate(const BenchmarkConfig& config) {
    if (config.replications == 0) throw ConfigError("replications must be >= 1");
    if (config.n_historical == 0) throw ConfigError("n_historical must be >= 1");
    if (config.test_points == 0) throw ConfigError("test_points must be >= 1");
    if (config.alphas.empty()) throw ConfigError("at least one alpha is required");
    if (config.frameworks.empty()) throw ConfigError("at least one framework is required");
    if (config.oracle_draws < kMinOracleDraws)
        throw ConfigError("oracle_draws must be >= " + std::to_string(kMinOracleDraws));
    if (config.threads == 0) throw ConfigError("threads must be >= 1");
    for (double a : config.alphas) {
        if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha values must lie in (0, 1)");
        if (std::floor(a * static_cast<double>(config.pipeline.predictive_draws)) < 1.0)
            throw ConfigError("alpha * predictive_draws must be >= 1 for every alpha");
    }
    validate(config.scenario);
    validate(config.pipeline);
}

const BenchmarkRow& BenchmarkResult::row(FrameworkId id, double alpha) const {
    for (const auto& r : rows)
        if (r.id == id && std::abs(r.alpha - alpha) < 1e-12) return r;
    throw PreconditionError("no benchmark row for " + to_string(id) + " at alpha " + std::to_string(alpha));
}

BenchmarkResult reproduce_benchmark(const BenchmarkConfig& config,
                                    const std::function<void(std::size_t)>& on_replication_done) {
    validate(config);
    const std::size_t reps = config.replications;
    std::vector<std::vector<ReplicationRecord>> per_rep(reps);
    std::vector<std::optional<std::string>> errors(reps);
    std::mutex mu;
    std::size_t done = 0;

    parallel_for(reps, config.threads, [&](std::size_t r) {
        const auto rep_seed = derive_seed(config.seed, r);
        try {
            const auto hist = generate_control(config.n_historical, config.scenario, derive_seed(rep_seed, 1));
            const auto test = make_test_set(config.scenario, config.test_points, config.alphas, config.oracle_draws,
                                            derive_seed(rep_seed, 2));
            FitCache cache;
            for (auto id : config.frameworks) {
                const auto outs = run_framework(id, hist, test, config.pipeline, derive_seed(rep_seed, 3),
                                                config.metrics_mode, &cache);
                for (const auto& o : outs) per_rep[r].push_back({r, id, o.alpha, o.metrics});
            }
        } catch (const Error& e) {
            per_rep[r].clear();
            errors[r] = e.what();
        }
        if (on_replication_done) {
            std::lock_guard<std::mutex> lock(mu);
            on_replication_done(++done);
        }
    });

    BenchmarkResult res;
    res.replications = reps;
    for (std::size_t r = 0; r < reps; ++r) {
        if (errors[r]) res.failures.push_back({r, *errors[r]});
        for (auto& rec : per_rep[r]) res.records.push_back(std::move(rec));
    }
    auto columns = kMetricColumns;
    columns.push_back("miscoverage_true_law");
    for (auto id : config.frameworks) {
        for (double a : config.alphas) {
            BenchmarkRow row;
            row.id = id;
            row.alpha = a;
            for (const auto& col : columns) {
                std::vector<double> vals;
                for (const auto& rec : res.records)
                    if (rec.id == id && rec.alpha == a)
                        if (auto v = metric_value(rec.metrics, col)) vals.push_back(*v);
                row.cells.push_back(aggregate(vals));
            }
            res.rows.push_back(std::move(row));
        }
    }
    return res;
}

double DopingResult::inside_probability(std::size_t framework, std::size_t point) const {
    const auto& reps = inside.at(framework);
    if (reps.empty()) throw PreconditionError("doping case: no successful replications");
    double s = 0.0;
    for (const auto& r : reps) s += r.at(point);
    return s / static_cast<double>(reps.size());
}

double DopingResult::inside_sd(std::size_t framework, std::size_t point) const {
    const auto& reps = inside.at(framework);
    if (reps.size() < 2) return 0.0;
    std::vector<double> v;
    for (const auto& r : reps) v.push_back(r.at(point));
    return stats::sd(v);
}

DopingResult doping_case(std::span<const BiomarkerReading> historical, std::span<const BiomarkerReading> athlete,
                         const DopingConfig& config) {
    if (athlete.empty()) throw PreconditionError("doping_case: no athlete readings");
    if (config.replications == 0) throw ConfigError("replications must be >= 1");
    if (config.frameworks.empty()) throw ConfigError("at least one framework is required");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (config.threads == 0) throw ConfigError("threads must be >= 1");
    validate(athlete);
    validate(config.pipeline);
    if (historical.empty()) {
        if (config.n_historical == 0) throw ConfigError("n_historical must be >= 1");
        validate(config.scenario);
    }

    std::vector<Point2> points;
    for (const auto& r : athlete) points.push_back({r.hgb, r.offs});
    const std::size_t nf = config.frameworks.size();
    const std::size_t reps = config.replications;
    // flags[r][f]
    std::vector<std::vector<std::vector<std::uint8_t>>> flags(reps);
    std::vector<std::optional<std::string>> errors(reps);

    parallel_for(reps, config.threads, [&](std::size_t r) {
        const auto rep_seed = derive_seed(config.seed, r);
        try {
            std::vector<BiomarkerReading> generated;
            std::span<const BiomarkerReading> hist = historical;
            if (historical.empty()) {
                generated = generate_control(config.n_historical, config.scenario, derive_seed(rep_seed, 1));
                hist = generated;
            }
            FitCache cache;
            for (auto id : config.frameworks) {
                const auto fit = fit_framework(id, hist, config.pipeline, derive_seed(rep_seed, 3), &cache);
                const auto region = build_region(fit, config.alpha);
                const auto values = measure_values(fit, points);
                auto f = flag_points(region, points, values);
                for (auto& x : f) x = x ? 0 : 1;
                flags[r].push_back(std::move(f));
            }
        } catch (const Error& e) {
            flags[r].clear();
            errors[r] = e.what();
        }
    });

    DopingResult res;
    res.frameworks = config.frameworks;
    res.readings.assign(athlete.begin(), athlete.end());
    res.inside.resize(nf);
    for (std::size_t r = 0; r < reps; ++r) {
        if (errors[r]) {
            res.failures.push_back({r, *errors[r]});
            continue;
        }
        for (std::size_t f = 0; f < nf; ++f) res.inside[f].push_back(std::move(flags[r][f]));
    }
    return res;
}

}  // namespace copadapt
