#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "copadapt/errors.hpp"
#include "copadapt/io.hpp"
#include "copadapt/parallel.hpp"

namespace copadapt::cli {

namespace fs = std::filesystem;
using Json = nlohmann::json;
using OJson = nlohmann::ordered_json;

namespace {

const char* const kCommands[] = {"simulate", "fit-prior", "predict", "hpr", "evaluate", "benchmark", "doping-case"};

template <class T>
T get(const Json& j, const std::string& key) {
    try {
        return j.get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError("config: bad value for '" + key + "' (" + e.what() + ")");
    }
}

const Json& object(const Json& j, const std::string& key) {
    if (!j.is_object()) throw ConfigError("config: '" + key + "' must be an object");
    return j;
}

[[noreturn]] void unknown_key(const std::string& where, const std::string& key) {
    throw ConfigError("config: unknown key '" + key + "'" + (where.empty() ? "" : " in '" + where + "'"));
}

void apply_mcmc(McmcConfig& m, const Json& j) {
    for (const auto& [k, v] : object(j, "mcmc").items()) {
        if (k == "chains") m.chains = get<std::size_t>(v, k);
        else if (k == "chain_length") m.chain_length = get<std::size_t>(v, k);
        else if (k == "burn_in") m.burn_in = get<std::size_t>(v, k);
        else if (k == "thinning") m.thinning = get<std::size_t>(v, k);
        else if (k == "adapt") m.adapt = get<bool>(v, k);
        else if (k == "target_acceptance") m.target_acceptance = get<double>(v, k);
        else if (k == "proposal_scales") m.proposal_scales = get<std::vector<double>>(v, k);
        else unknown_key("mcmc", k);
    }
}

void apply_copula_chain(CopulaChainConfig& c, const Json& j) {
    for (const auto& [k, v] : object(j, "copula_chain").items()) {
        if (k == "burn_in") c.burn_in = get<std::size_t>(v, k);
        else if (k == "steps") c.steps = get<std::size_t>(v, k);
        else if (k == "proposal_scale") c.proposal_scale = get<double>(v, k);
        else if (k == "adapt") c.adapt = get<bool>(v, k);
        else unknown_key("copula_chain", k);
    }
}

void apply_derive(DerivePriorsConfig& d, const Json& j) {
    for (const auto& [k, v] : object(j, "derive").items()) {
        if (k == "hgb_scale_df") d.hgb_scale_df = get<std::vector<double>>(v, k);
        else if (k == "offs_scale_df") d.offs_scale_df = get<std::vector<double>>(v, k);
        else if (k == "default_scale_df") d.default_scale_df = get<double>(v, k);
        else if (k == "weight_concentration") d.weight_concentration = get<std::vector<double>>(v, k);
        else unknown_key("derive", k);
    }
}

void apply_np(CopulaNpConfig& n, const Json& j) {
    for (const auto& [k, v] : object(j, "np").items()) {
        if (k == "hgb_bandwidth") n.hgb_bandwidth = get<double>(v, k);
        else if (k == "offs_bandwidth") n.offs_bandwidth = get<double>(v, k);
        else if (k == "copula_bandwidth_scale") n.copula_bandwidth_scale = get<double>(v, k);
        else unknown_key("np", k);
    }
}

void apply_scenario(ScenarioParams& s, const Json& j) {
    for (const auto& [k, v] : object(j, "scenario").items()) {
        if (k == "hgb") {
            double mean = s.hgb.components[0].mean, sd = s.hgb.components[0].sd;
            for (const auto& [kk, vv] : object(v, "scenario.hgb").items()) {
                if (kk == "mean") mean = get<double>(vv, kk);
                else if (kk == "sd") sd = get<double>(vv, kk);
                else unknown_key("scenario.hgb", kk);
            }
            s.hgb = MarginalModel::gaussian(mean, sd);
        } else if (k == "offs") {
            std::vector<double> w, mu, sd;
            for (const auto& c : s.offs.components) {
                w.push_back(c.weight);
                mu.push_back(c.mean);
                sd.push_back(c.sd);
            }
            for (const auto& [kk, vv] : object(v, "scenario.offs").items()) {
                if (kk == "weights") w = get<std::vector<double>>(vv, kk);
                else if (kk == "means") mu = get<std::vector<double>>(vv, kk);
                else if (kk == "sds") sd = get<std::vector<double>>(vv, kk);
                else unknown_key("scenario.offs", kk);
            }
            if (w.size() != mu.size() || w.size() != sd.size())
                throw ConfigError("config: scenario.offs weights, means and sds differ in length");
            std::vector<MixtureComponent> comp;
            for (std::size_t i = 0; i < w.size(); ++i) comp.push_back({w[i], mu[i], sd[i]});
            s.offs = comp.size() == 1 ? MarginalModel::gaussian(mu[0], sd[0]) : MarginalModel::mixture(comp);
        } else if (k == "copula") {
            for (const auto& [kk, vv] : object(v, "scenario.copula").items()) {
                if (kk == "family") s.copula.family = parse_copula_family(get<std::string>(vv, kk));
                else if (kk == "theta") s.copula.theta = get<double>(vv, kk);
                else unknown_key("scenario.copula", kk);
            }
        } else {
            unknown_key("scenario", k);
        }
    }
}

OJson scenario_json(const ScenarioParams& s) {
    OJson j;
    j["hgb"] = OJson{{"mean", s.hgb.components[0].mean}, {"sd", s.hgb.components[0].sd}};
    std::vector<double> w, mu, sd;
    for (const auto& c : s.offs.components) {
        w.push_back(c.weight);
        mu.push_back(c.mean);
        sd.push_back(c.sd);
    }
    j["offs"] = OJson{{"weights", w}, {"means", mu}, {"sds", sd}};
    j["copula"] = OJson{{"family", to_string(s.copula.family)}, {"theta", s.copula.theta}};
    return j;
}

fs::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv(kOutEnv); env && *env) return env;
    return "copadapt-out";
}

class Run {
public:
    Run(RunConfig cfg, fs::path out, std::ostream& os, std::ostream& es)
        : cfg_(std::move(cfg)), out_(std::move(out)), os_(os), es_(es) {}

    void execute() {
        validate_common();
        const auto& c = cfg_.command;
        if (c == "simulate") simulate();
        else if (c == "fit-prior") fit_prior();
        else if (c == "predict") predict();
        else if (c == "hpr") hpr();
        else if (c == "evaluate") evaluate();
        else if (c == "benchmark") benchmark();
        else if (c == "doping-case") doping();
        else throw ConfigError("unknown command '" + c + "'");
        write_manifest();
    }

private:
    RunConfig cfg_;
    fs::path out_;
    std::ostream& os_;
    std::ostream& es_;
    std::vector<ManifestEntry> outputs_;

    void emit(const std::string& name, const std::string& text) {
        const auto path = out_ / name;
        write_text_file(path, text);
        outputs_.push_back({name, fnv1a_hex(text)});
    }

    void write_manifest() {
        Manifest m;
        m.command = cfg_.command;
        m.config_json = to_json(cfg_).dump();
        m.config_digest = fnv1a_hex(m.config_json);
        m.seed = cfg_.seed;
        m.outputs = outputs_;
        write_text_file(out_ / "manifest.json", manifest_to_json(m));
        os_ << "wrote " << (out_ / "manifest.json").string() << "\n";
    }

    void validate_common() {
        if (cfg_.threads == 0) throw ConfigError("--threads must be >= 1");
        if (cfg_.alphas.empty()) throw ConfigError("at least one --alpha is required");
        for (double a : cfg_.alphas)
            if (!(a > 0.0 && a < 1.0)) throw ConfigError("alpha values must lie in (0, 1)");
        if (cfg_.frameworks.empty()) throw ConfigError("at least one --framework is required");
        validate(cfg_.scenario);
    }

    std::vector<BiomarkerReading> historical() {
        if (!cfg_.data.empty()) return read_readings_csv(cfg_.data);
        return generate_control(cfg_.n, cfg_.scenario, cfg_.seed);
    }

    IfmConfig ifm(const PriorSpec& priors) const {
        IfmConfig c;
        c.priors = priors;
        c.marginal_mcmc = cfg_.pipeline.marginal_mcmc;
        c.copula = cfg_.pipeline.copula;
        c.pilot_length = cfg_.pipeline.pilot_length;
        c.max_rows = cfg_.pipeline.posterior_rows;
        c.threads = cfg_.threads;
        c.seed = cfg_.seed;
        return c;
    }

    PredictiveSample load_predictive() {
        if (cfg_.predictive.empty()) throw ConfigError("--predictive is required");
        fs::path csv = cfg_.predictive;
        auto sidecar = csv;
        sidecar.replace_extension(".json");
        return parse_predictive(read_text_file(csv), read_text_file(sidecar));
    }

    ConcentrationMeasure measure_for(const PredictiveSample& s) const {
        if (cfg_.measure == "copula-np") return make_copula_np_measure(s, cfg_.pipeline.np);
        if (cfg_.measure == "true-density") return make_true_density_measure(cfg_.scenario.joint());
        throw ConfigError("unknown measure '" + cfg_.measure + "' (expected copula-np|true-density)");
    }

    static std::string alpha_tag(double a) { return format_double(a); }

    void simulate() {
        std::vector<BiomarkerReading> r;
        if (!cfg_.base.empty()) {
            r = resample_with_noise(read_readings_csv(cfg_.base), cfg_.n, cfg_.hgb_noise, cfg_.offs_noise, cfg_.seed);
        } else if (cfg_.synthetic_athlete) {
            r = synthetic_athlete(cfg_.scenario);
        } else {
            r = generate_control(cfg_.n, cfg_.scenario, cfg_.seed);
        }
        emit("readings.csv", readings_to_csv(r));
        os_ << "simulated " << r.size() << " readings\n";
    }

    void fit_prior() {
        if (cfg_.frameworks.size() != 1) throw ConfigError("fit-prior takes exactly one --framework");
        const auto spec = framework_spec(cfg_.frameworks.front());
        const auto data = historical();
        const auto priors = default_priors(data, spec.hgb_family, spec.offs_family, spec.offs_components, spec.copula);
        const auto draws = bayesian_ifm(data, ifm(priors));
        const auto derived = derive_priors(draws, cfg_.pipeline.derive);
        for (const auto& w : draws.warnings) es_ << "warning: " << w << "\n";
        for (const auto& w : derived.warnings) es_ << "warning: " << w << "\n";
        emit("posterior.csv", posterior_to_csv(draws));
        emit("prior.json", prior_spec_to_json(derived.spec, derived.summary));
        os_ << "parameter,map,sd\n";
        for (const auto& s : derived.summary) os_ << s.name << ',' << format_double(s.map) << ',' << format_double(s.sd) << "\n";
    }

    void predict() {
        if (cfg_.priors.empty()) throw ConfigError("--priors is required");
        const auto prior_text = read_text_file(cfg_.priors);
        const auto priors = prior_spec_from_json(prior_text);
        std::string source = prior_text;
        PredictiveSample s;
        if (!cfg_.athlete.empty()) {
            const auto readings = read_readings_csv(cfg_.athlete);
            source += readings_to_csv(readings);
            const auto post = posterior_update_athlete(priors, readings, ifm(priors));
            s = predictive_sample(post, cfg_.pipeline.predictive_draws, cfg_.seed);
            s.athlete_id = readings.front().athlete_id;
        } else {
            s = predictive_sample(priors, cfg_.pipeline.predictive_draws, cfg_.seed);
        }
        emit("predictive.csv", predictive_to_csv(s));
        emit("predictive.json", predictive_sidecar_json(s, fnv1a_hex(source)));
        os_ << to_string(s.mode) << ": " << s.size() << " draws\n";
    }

    void hpr() {
        const auto s = load_predictive();
        const auto g = measure_for(s);
        std::vector<Point2> pts;
        for (std::size_t i = 0; i < s.size(); ++i) pts.push_back(s.point(i));
        for (double a : cfg_.alphas) {
            const auto est = estimate_hpr(s, g, a);
            emit("hpr-" + alpha_tag(a) + ".csv", hpr_to_csv(pts, est));
            emit("hpr-" + alpha_tag(a) + ".json", hpr_header_json(est, s.seed));
            os_ << "alpha " << a << ": threshold " << format_double(est.threshold) << ", " << est.inside_count() << "/"
                << est.size() << " inside\n";
        }
        const auto [hlo, hhi] = std::minmax_element(s.hgb.begin(), s.hgb.end());
        const auto [olo, ohi] = std::minmax_element(s.offs.begin(), s.offs.end());
        emit("contour.csv", contour_to_csv(contour_grid(g, *hlo, *hhi, *olo, *ohi, cfg_.grid_steps)));
    }

    void evaluate() {
        const auto s = load_predictive();
        const auto g = measure_for(s);
        const auto test = make_test_set(cfg_.scenario, cfg_.test_points, cfg_.alphas, cfg_.oracle_draws, cfg_.seed);
        std::vector<double> values(test.points.size());
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = g(test.points[i][0], test.points[i][1]);
        std::string csv = "alpha," + metrics_csv_header() + "\n";
        for (std::size_t a = 0; a < test.alphas.size(); ++a) {
            const auto est = estimate_hpr(s, g, test.alphas[a]);
            std::vector<std::uint8_t> flags(values.size());
            std::size_t n_flag = 0;
            for (std::size_t i = 0; i < values.size(); ++i) n_flag += flags[i] = est.contains_value(values[i]) ? 0 : 1;
            const auto counts = confusion_counts(test.atypical[a], flags, cfg_.metrics_mode);
            auto m = classification_metrics(counts);
            m.miscoverage = est.sample_miscoverage();
            m.miscoverage_true_law = static_cast<double>(n_flag) / static_cast<double>(flags.size());
            emit("metrics-" + alpha_tag(test.alphas[a]) + ".json", metrics_to_json(m, counts));
            csv += alpha_tag(test.alphas[a]) + "," + metrics_csv_row(m) + "\n";
        }
        emit("metrics.csv", csv);
        os_ << csv;
    }

    void benchmark() {
        BenchmarkConfig b;
        b.replications = cfg_.replications;
        b.n_historical = cfg_.n;
        b.alphas = cfg_.alphas;
        b.test_points = cfg_.test_points;
        b.oracle_draws = cfg_.oracle_draws;
        b.seed = cfg_.seed;
        b.frameworks = cfg_.frameworks;
        b.scenario = cfg_.scenario;
        b.metrics_mode = cfg_.metrics_mode;
        b.pipeline = cfg_.pipeline;
        b.pipeline.threads = 1;
        b.threads = cfg_.threads;
        const auto res = reproduce_benchmark(b, [&](std::size_t done) {
            es_ << "replication " << done << "/" << b.replications << " done\n";
        });
        for (const auto& f : res.failures) es_ << "replication " << f.replication << " failed: " << f.message << "\n";
        const auto csv = benchmark_to_csv(res);
        emit("benchmark.csv", csv);
        emit("benchmark.json", benchmark_to_json(res));
        if (cfg_.persist) {
            for (std::size_t r = 0; r < b.replications; ++r) {
                std::string rows = "framework,alpha," + metrics_csv_header() + "\n";
                bool any = false;
                for (const auto& rec : res.records) {
                    if (rec.replication != r) continue;
                    any = true;
                    rows += to_string(rec.id) + "," + format_double(rec.alpha) + "," + metrics_csv_row(rec.metrics) + "\n";
                }
                if (any) emit("replications/rep-" + std::to_string(r + 1) + ".csv", rows);
            }
        }
        os_ << csv;
        if (!res.failures.empty()) os_ << res.failures.size() << " replication(s) failed and were excluded\n";
    }

    void doping() {
        if (cfg_.athlete.empty()) throw IoError("--athlete is required; readings CSV with header athlete_id,occasion,hgb,offs[,x1,...,xp]");
        const auto athlete = read_readings_csv(cfg_.athlete);
        std::vector<BiomarkerReading> hist;
        if (!cfg_.data.empty()) hist = read_readings_csv(cfg_.data);
        DopingConfig d;
        d.replications = cfg_.replications;
        d.alpha = cfg_.alphas.front();
        d.frameworks = cfg_.frameworks;
        d.n_historical = cfg_.n;
        d.scenario = cfg_.scenario;
        d.pipeline = cfg_.pipeline;
        d.pipeline.threads = 1;
        d.seed = cfg_.seed;
        d.threads = cfg_.threads;
        const auto res = doping_case(hist, athlete, d);
        for (const auto& f : res.failures) es_ << "replication " << f.replication << " failed: " << f.message << "\n";
        const auto csv = doping_to_csv(res);
        emit("doping.csv", csv);
        emit("doping.json", doping_to_json(res, d.alpha));
        os_ << csv;
    }
};

}  // namespace

RunConfig default_config(const std::string& command) {
    RunConfig c;
    c.command = command;
    c.threads = default_threads();
    if (command == "fit-prior" || command == "predict") {
        c.pipeline.marginal_mcmc = McmcConfig{};
        c.pipeline.copula = CopulaChainConfig{};
        c.pipeline.pilot_length = 4000;
        c.pipeline.posterior_rows = 0;
        c.frameworks = {FrameworkId::MvtClayCop};
    }
    if (command == "doping-case") {
        c.replications = 20;
        c.alphas = {0.001};
    }
    if (command == "hpr" || command == "evaluate") c.alphas = {0.05};
    return c;
}

OJson to_json(const RunConfig& c) {
    OJson j;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["alphas"] = c.alphas;
    std::vector<std::string> fw;
    for (auto f : c.frameworks) fw.push_back(to_string(f));
    j["frameworks"] = fw;
    j["metrics_mode"] = to_string(c.metrics_mode);
    j["n"] = c.n;
    j["replications"] = c.replications;
    j["test_points"] = c.test_points;
    j["oracle_draws"] = c.oracle_draws;
    j["scenario"] = scenario_json(c.scenario);
    const auto& m = c.pipeline.marginal_mcmc;
    j["mcmc"] = OJson{{"chains", m.chains},       {"chain_length", m.chain_length},
                      {"burn_in", m.burn_in},     {"thinning", m.thinning},
                      {"adapt", m.adapt},         {"target_acceptance", m.target_acceptance},
                      {"proposal_scales", m.proposal_scales}};
    const auto& cc = c.pipeline.copula;
    j["copula_chain"] = OJson{
        {"burn_in", cc.burn_in}, {"steps", cc.steps}, {"proposal_scale", cc.proposal_scale}, {"adapt", cc.adapt}};
    j["pilot_length"] = c.pipeline.pilot_length;
    j["posterior_rows"] = c.pipeline.posterior_rows;
    j["predictive_draws"] = c.pipeline.predictive_draws;
    const auto& d = c.pipeline.derive;
    j["derive"] = OJson{{"hgb_scale_df", d.hgb_scale_df},
                        {"offs_scale_df", d.offs_scale_df},
                        {"default_scale_df", d.default_scale_df},
                        {"weight_concentration", d.weight_concentration}};
    const auto& np = c.pipeline.np;
    j["np"] = OJson{{"hgb_bandwidth", np.hgb_bandwidth},
                    {"offs_bandwidth", np.offs_bandwidth},
                    {"copula_bandwidth_scale", np.copula_bandwidth_scale}};
    j["data"] = c.data;
    j["athlete"] = c.athlete;
    j["priors"] = c.priors;
    j["predictive"] = c.predictive;
    j["base"] = c.base;
    j["hgb_noise"] = c.hgb_noise;
    j["offs_noise"] = c.offs_noise;
    j["synthetic_athlete"] = c.synthetic_athlete;
    j["measure"] = c.measure;
    j["grid_steps"] = c.grid_steps;
    j["persist"] = c.persist;
    return j;
}

void apply_json(RunConfig& c, const Json& doc) {
    if (!doc.is_object()) throw ConfigError("config: top level must be a JSON object");
    if (doc.contains("command") && doc.contains("config")) {
        const auto cmd = doc.at("command").get<std::string>();
        if (!c.command.empty() && cmd != c.command)
            throw ConfigError("config: manifest is for '" + cmd + "', not '" + c.command + "'");
        apply_json(c, doc.at("config"));
        return;
    }
    for (const auto& [k, v] : doc.items()) {
        if (k == "seed") c.seed = get<std::uint64_t>(v, k);
        else if (k == "threads") c.threads = get<unsigned>(v, k);
        else if (k == "alphas") c.alphas = get<std::vector<double>>(v, k);
        else if (k == "frameworks") {
            c.frameworks.clear();
            for (const auto& s : get<std::vector<std::string>>(v, k)) c.frameworks.push_back(parse_framework(s));
        } else if (k == "metrics_mode") c.metrics_mode = parse_metrics_mode(get<std::string>(v, k));
        else if (k == "n") c.n = get<std::size_t>(v, k);
        else if (k == "replications") c.replications = get<std::size_t>(v, k);
        else if (k == "test_points") c.test_points = get<std::size_t>(v, k);
        else if (k == "oracle_draws") c.oracle_draws = get<std::size_t>(v, k);
        else if (k == "scenario") apply_scenario(c.scenario, v);
        else if (k == "mcmc") apply_mcmc(c.pipeline.marginal_mcmc, v);
        else if (k == "copula_chain") apply_copula_chain(c.pipeline.copula, v);
        else if (k == "pilot_length") c.pipeline.pilot_length = get<std::size_t>(v, k);
        else if (k == "posterior_rows") c.pipeline.posterior_rows = get<std::size_t>(v, k);
        else if (k == "predictive_draws") c.pipeline.predictive_draws = get<std::size_t>(v, k);
        else if (k == "derive") apply_derive(c.pipeline.derive, v);
        else if (k == "np") apply_np(c.pipeline.np, v);
        else if (k == "data") c.data = get<std::string>(v, k);
        else if (k == "athlete") c.athlete = get<std::string>(v, k);
        else if (k == "priors") c.priors = get<std::string>(v, k);
        else if (k == "predictive") c.predictive = get<std::string>(v, k);
        else if (k == "base") c.base = get<std::string>(v, k);
        else if (k == "hgb_noise") c.hgb_noise = get<double>(v, k);
        else if (k == "offs_noise") c.offs_noise = get<double>(v, k);
        else if (k == "synthetic_athlete") c.synthetic_athlete = get<bool>(v, k);
        else if (k == "measure") c.measure = get<std::string>(v, k);
        else if (k == "grid_steps") c.grid_steps = get<std::size_t>(v, k);
        else if (k == "persist") c.persist = get<bool>(v, k);
        else unknown_key("", k);
    }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Copula-based adaptive reference regions for paired biomarkers", "copadapt"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    std::string config_path, out_dir, metrics_mode;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::vector<double> alphas;
    std::vector<std::string> frameworks;
    std::size_t n = 0, reps = 0, draws = 0, test_points = 0;
    std::string data, athlete, priors, predictive, base, measure;
    double hgb_noise = 0.0, offs_noise = 0.0;
    bool synth = false, persist = false;

    struct Flags {
        CLI::Option *config, *seed, *out, *threads, *alpha, *framework, *mode, *n, *reps, *draws, *test_points, *data,
            *athlete, *priors, *predictive, *base, *hgb_noise, *offs_noise, *synth, *persist, *measure;
    };
    std::map<std::string, Flags> flags;
    static const std::map<std::string, std::string> kDescriptions{
        {"simulate", "generate control readings, resampled readings or the synthetic athlete"},
        {"fit-prior", "fit the historical posterior and derive priors"},
        {"predict", "draw a prior- or athlete posterior-predictive sample"},
        {"hpr", "highest-predictive region of a predictive sample, with contour data"},
        {"evaluate", "score a predictive region against the true law"},
        {"benchmark", "replicated comparison of the six frameworks"},
        {"doping-case", "score an athlete's readings against every framework's region"}};
    for (const char* name : kCommands) {
        auto* sub = app.add_subcommand(name, kDescriptions.at(name));
        Flags f{};
        f.config = sub->add_option("--config", config_path, "JSON config or manifest");
        f.seed = sub->add_option("--seed", seed, "master seed");
        f.out = sub->add_option("--out", out_dir, std::string("output directory (default $") + kOutEnv + " or ./copadapt-out)");
        f.threads = sub->add_option("--threads", threads, "worker threads");
        f.alpha = sub->add_option("--alpha", alphas, "miscoverage level (repeatable)");
        f.framework = sub->add_option("--framework", frameworks, "framework id (repeatable)");
        f.mode = sub->add_option("--metrics-mode", metrics_mode, "standard|appendix-b-literal");
        f.n = sub->add_option("--n", n, "number of historical/generated readings");
        f.reps = sub->add_option("--reps", reps, "replications");
        f.draws = sub->add_option("--draws", draws, "predictive draws");
        f.test_points = sub->add_option("--test-points", test_points, "true-law test points per replication");
        f.data = sub->add_option("--data", data, "historical readings CSV");
        f.athlete = sub->add_option("--athlete", athlete, "athlete readings CSV");
        f.priors = sub->add_option("--priors", priors, "prior spec JSON (from fit-prior)");
        f.predictive = sub->add_option("--predictive", predictive, "predictive CSV (sidecar .json alongside)");
        f.base = sub->add_option("--base", base, "base readings to resample with noise");
        f.hgb_noise = sub->add_option("--hgb-noise", hgb_noise, "hgb noise sd for --base");
        f.offs_noise = sub->add_option("--offs-noise", offs_noise, "offs noise sd for --base");
        f.synth = sub->add_flag("--synthetic-athlete", synth, "emit the synthetic athlete fixture");
        f.persist = sub->add_flag("--persist", persist, "write per-replication tables");
        f.measure = sub->add_option("--measure", measure, "copula-np|true-density");
        flags[name] = f;
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kUsage;
    }

    try {
        const auto* sub = app.get_subcommands().front();
        const std::string command = sub->get_name();
        const auto& f = flags.at(command);
        RunConfig cfg = default_config(command);
        if (f.config->count()) {
            const auto text = read_text_file(config_path);
            Json doc;
            try {
                doc = Json::parse(text);
            } catch (const Json::exception& e) {
                throw ConfigError(std::string("config: invalid JSON (") + e.what() + ")");
            }
            apply_json(cfg, doc);
        }
        if (f.seed->count()) cfg.seed = seed;
        if (f.threads->count()) cfg.threads = threads;
        if (f.alpha->count()) cfg.alphas = alphas;
        if (f.framework->count()) {
            cfg.frameworks.clear();
            for (const auto& s : frameworks) cfg.frameworks.push_back(parse_framework(s));
        }
        if (f.mode->count()) cfg.metrics_mode = parse_metrics_mode(metrics_mode);
        if (f.n->count()) cfg.n = n;
        if (f.reps->count()) cfg.replications = reps;
        if (f.draws->count()) cfg.pipeline.predictive_draws = draws;
        if (f.test_points->count()) cfg.test_points = test_points;
        if (f.data->count()) cfg.data = data;
        if (f.athlete->count()) cfg.athlete = athlete;
        if (f.priors->count()) cfg.priors = priors;
        if (f.predictive->count()) cfg.predictive = predictive;
        if (f.base->count()) cfg.base = base;
        if (f.hgb_noise->count()) cfg.hgb_noise = hgb_noise;
        if (f.offs_noise->count()) cfg.offs_noise = offs_noise;
        if (f.synth->count()) cfg.synthetic_athlete = synth;
        if (f.persist->count()) cfg.persist = persist;
        if (f.measure->count()) cfg.measure = measure;

        Run(std::move(cfg), output_dir(out_dir), out, err).execute();
        return kOk;
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const fs::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return kIo;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kNumerical;
    } catch (const Error& e) {
        err << "invalid input: " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    }
}

}  // namespace copadapt::cli
