// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails. Takes roughly 20 minutes on one core.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "copadapt/experiments.hpp"
#include "copadapt/io.hpp"
#include "copadapt/stats.hpp"

namespace fs = std::filesystem;
using namespace copadapt;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Verdict()>& check) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
        v = check();
    } catch (const std::exception& e) {
        v = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!v.pass) ++failures;
    std::printf("%s %d %s: %s [%.0fs]\n", v.pass ? "PASS" : "FAIL", id, name.c_str(), v.detail.c_str(), secs);
    std::fflush(stdout);
}

std::string fmt(double x, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

Verdict prior_recovery() {
    const ScenarioParams truth;
    const auto data = generate_control(500, truth, derive_seed(20240607, 1));
    const auto spec = framework_spec(FrameworkId::MvtClayCop);
    IfmConfig cfg;
    cfg.priors = default_priors(data, spec.hgb_family, spec.offs_family, spec.offs_components, spec.copula);
    cfg.marginal_mcmc.seed = 11;
    cfg.seed = 12;
    const auto derived = derive_priors(bayesian_ifm(data, cfg));

    // Generating values and the reference posterior spreads.
    const std::map<std::string, std::pair<double, double>> reference{
        {"mu_hgb", {15.77, 0.05}},      {"sigma_hgb", {0.76, 0.03}},    {"mu_offs_1", {81.58, 1.15}},
        {"mu_offs_2", {92.13, 0.57}},   {"mu_offs_3", {104.54, 2.88}},  {"sigma_offs_1", {2.97, 0.64}},
        {"sigma_offs_2", {3.28, 1.33}}, {"sigma_offs_3", {5.29, 1.38}}, {"w_offs_1", {0.24, 0.05}},
        {"w_offs_2", {0.49, 0.10}},     {"w_offs_3", {0.27, 0.09}},     {"theta_cop", {1.81, 0.22}}};
    Verdict v;
    std::size_t seen = 0;
    double worst = 0.0;
    std::string worst_name;
    for (const auto& s : derived.summary) {
        const auto it = reference.find(s.name);
        if (it == reference.end()) continue;
        ++seen;
        const double ratio = std::abs(s.map - it->second.first) / it->second.second;
        if (ratio > worst) {
            worst = ratio;
            worst_name = s.name;
        }
        if (ratio > 3.0) v.pass = false;
    }
    if (seen != reference.size()) v.pass = false;
    v.detail = std::to_string(seen) + "/12 parameters, worst |MAP-truth|/SD = " + fmt(worst, 2) + " (" + worst_name +
               "), limit 3";
    return v;
}

BenchmarkResult run_table_benchmark() {
    BenchmarkConfig cfg;
    cfg.replications = 20;
    cfg.n_historical = 500;
    cfg.alphas = {0.05, 0.01, 0.001};
    cfg.test_points = 10'000;
    cfg.pipeline.predictive_draws = 5000;
    cfg.seed = 20240607;
    return reproduce_benchmark(cfg, [](std::size_t done) {
        std::fprintf(stderr, "  benchmark replication %zu/20\n", done);
    });
}

Verdict exact_coverage(const BenchmarkResult& b) {
    Verdict v;
    std::size_t checked = 0;
    for (const auto& r : b.records) {
        if (!framework_spec(r.id).joint_region) continue;
        ++checked;
        const double expected = std::floor(r.alpha * 5000) / 5000.0;
        if (!r.metrics.miscoverage || *r.metrics.miscoverage != expected) v.pass = false;
    }
    if (checked == 0 || !b.failures.empty()) v.pass = false;
    v.detail = std::to_string(checked) + " joint-region results checked, " + std::to_string(b.failures.size()) +
               " failed replications";
    return v;
}

Verdict uni_miscoverage(const BenchmarkResult& b) {
    const auto& cell = b.row(FrameworkId::Uni, 0.05).cells[0];
    Verdict v;
    v.pass = cell.count > 0 && cell.mean >= 0.090 && cell.mean <= 0.106;
    v.detail = "mean " + fmt(cell.mean) + " (sd " + fmt(cell.sd) + "), target [0.090, 0.106]";
    return v;
}

Verdict claycop_classification(const BenchmarkResult& b) {
    const auto& row = b.row(FrameworkId::MvtClayCop, 0.05);
    const double fpr = row.cells[1].mean, fnr = row.cells[2].mean, mcc = row.cells[5].mean;
    Verdict v;
    v.pass = row.cells[1].count > 0 && row.cells[2].count > 0 && row.cells[5].count > 0 && fpr <= 0.02 &&
             fnr <= 0.30 && mcc >= 0.70;
    v.detail = "FPR " + fmt(fpr) + " (<= 0.02), FNR " + fmt(fnr) + " (<= 0.30), MCC " + fmt(mcc) + " (>= 0.70)";
    return v;
}

Verdict fnr_ordering(const BenchmarkResult& b) {
    Verdict v;
    std::ostringstream d;
    for (double alpha : {0.05, 0.01}) {
        std::map<std::size_t, double> uni, cop;
        for (const auto& r : b.records) {
            if (r.alpha != alpha || !r.metrics.fnr) continue;
            if (r.id == FrameworkId::Uni) uni[r.replication] = *r.metrics.fnr;
            if (r.id == FrameworkId::MvtClayCop) cop[r.replication] = *r.metrics.fnr;
        }
        std::size_t wins = 0;
        for (const auto& [rep, f] : cop)
            if (uni.count(rep) && f < uni[rep]) ++wins;
        const double share = static_cast<double>(wins) / 20.0;
        if (share < 0.9) v.pass = false;
        d << "alpha " << alpha << ": " << wins << "/20; ";
    }
    v.detail = d.str() + "need >= 90%";
    return v;
}

Verdict hpr_geometry() {
    const JointModel normal{MarginalModel::gaussian(0, 1), MarginalModel::gaussian(0, 1),
                            CopulaModel{CopulaFamily::Independence, 0.0}};
    const auto sample = normal.sample(100'000, 4477);
    const auto h = estimate_hpr(sample, make_true_density_measure(normal), 0.05);
    const double radius = std::sqrt(-2.0 * std::log(2.0 * M_PI * h.threshold));
    const double expected = std::sqrt(-2.0 * std::log(0.05));
    Verdict v;
    v.pass = std::abs(radius / 2.4477 - 1.0) <= 0.02;
    v.detail = "radius " + fmt(radius) + " vs " + fmt(expected) + " (2% tolerance)";
    return v;
}

Verdict conjugate_oracle() {
    Rng rng(90210);
    Verdict v;
    double worst = 0.0;
    for (int k = 0; k < 5; ++k) {
        const double sigma = 0.5 + 2.0 * uniform01(rng);
        const double m0 = 20.0 * (uniform01(rng) - 0.5);
        const double s0 = 0.5 + 3.0 * uniform01(rng);
        const std::size_t n = 5 + static_cast<std::size_t>(45 * uniform01(rng));
        const double mu = m0 + s0 * standard_normal(rng);
        std::vector<double> y(n);
        double sum = 0.0;
        for (auto& x : y) sum += x = mu + sigma * standard_normal(rng);
        const double prec = 1.0 / (s0 * s0) + n / (sigma * sigma);
        const double post_mean = (m0 / (s0 * s0) + sum / (sigma * sigma)) / prec;
        const double post_sd = 1.0 / std::sqrt(prec);

        McmcConfig c;
        c.chains = 4;
        c.chain_length = 30'000;
        c.burn_in = 5'000;
        c.thinning = 1;
        c.seed = 500 + k;
        const auto r = rw_mh(
            [&](std::span<const double> m) {
                double lp = -0.5 * std::pow((m[0] - m0) / s0, 2);
                for (double x : y) lp -= 0.5 * std::pow((x - m[0]) / sigma, 2);
                return lp;
            },
            std::vector<double>{m0}, c);
        const auto draws = r.column(0);
        const double ess = stats::effective_sample_size(draws);
        const double mean = stats::mean(draws), sd = stats::sd(draws);
        const double mcse_mean = sd / std::sqrt(ess);
        // MCSE of a standard deviation estimate, normal approximation.
        const double mcse_sd = sd / std::sqrt(2.0 * ess);
        const double z = std::max(std::abs(mean - post_mean) / mcse_mean, std::abs(sd - post_sd) / mcse_sd);
        worst = std::max(worst, z);
        if (z > 3.0) v.pass = false;
    }
    v.detail = "5 configurations, worst deviation " + fmt(worst, 2) + " MCSE (limit 3)";
    return v;
}

double mixed_difference(const CopulaModel& m, double u, double v, double h) {
    return (copula_cdf(m, u + h, v + h) - copula_cdf(m, u + h, v - h) - copula_cdf(m, u - h, v + h) +
            copula_cdf(m, u - h, v - h)) /
           (4.0 * h * h);
}

Verdict copula_suite() {
    Verdict v;
    std::ostringstream d;
    int reflection_bad = 0, frechet_bad = 0, fd_bad = 0;
    double worst_tau = 0.0;
    const std::vector<CopulaModel> models{{CopulaFamily::Clayton, 1.81},
                                          {CopulaFamily::SurvClayton, 1.81},
                                          {CopulaFamily::Frank, 5.0},
                                          {CopulaFamily::Frank, -3.0},
                                          {CopulaFamily::Gaussian, 0.6},
                                          {CopulaFamily::Gaussian, -0.4},
                                          {CopulaFamily::Independence, 0.0}};
    // Reflection: the survival Clayton density is the Clayton density at (1-u, 1-v).
    const CopulaModel clay{CopulaFamily::Clayton, 1.81}, surv{CopulaFamily::SurvClayton, 1.81};
    for (int i = 1; i < 50; ++i)
        for (int j = 1; j < 50; ++j) {
            const double u = i / 50.0, w = j / 50.0;
            if (copula_pdf(surv, u, w) != copula_pdf(clay, 1.0 - u, 1.0 - w)) ++reflection_bad;
        }
    for (const auto& m : models) {
        for (int i = 0; i <= 40; ++i)
            for (int j = 0; j <= 40; ++j) {
                const double u = i / 40.0, w = j / 40.0, c = copula_cdf(m, u, w);
                if (c < std::max(u + w - 1.0, 0.0) - 1e-12 || c > std::min(u, w) + 1e-12) ++frechet_bad;
            }
        for (auto [u, w] : {std::pair{0.5, 0.5}, std::pair{0.3, 0.6}, std::pair{0.8, 0.2}, std::pair{0.15, 0.85}}) {
            const double fd = mixed_difference(m, u, w, 1e-4), pdf = copula_pdf(m, u, w);
            if (std::abs(pdf - fd) > 1e-4 * std::abs(pdf)) ++fd_bad;
        }
        const auto s = copula_sample(m, 100'000, 77);
        std::vector<double> a, b;
        for (const auto& p : s) {
            a.push_back(p.u);
            b.push_back(p.v);
        }
        worst_tau = std::max(worst_tau, std::abs(stats::kendall_tau(a, b) - kendall_tau(m)));
    }
    v.pass = reflection_bad == 0 && frechet_bad == 0 && fd_bad == 0 && worst_tau <= 0.01;
    d << "reflection mismatches " << reflection_bad << ", Frechet violations " << frechet_bad
      << ", finite-difference misses " << fd_bad << ", worst tau error " << fmt(worst_tau);
    v.detail = d.str();
    return v;
}

Verdict metrics_example() {
    ConfusionCounts c;
    c.tp = 8;
    c.fn = 2;
    c.fp = 5;
    c.tn = 85;
    const auto r = classification_metrics(c);
    auto r3 = [](double x) { return std::round(x * 1000.0) / 1000.0; };
    Verdict v;
    v.pass = r3(*r.fnr) == 0.200 && r3(*r.fpr) == r3(0.0556) && r3(*r.accuracy) == 0.930 && r3(*r.f1) == 1.656 &&
             r3(*r.mcc) == 0.664;
    v.detail = "FNR " + fmt(*r.fnr, 3) + ", FPR " + fmt(*r.fpr, 4) + ", accuracy " + fmt(*r.accuracy, 3) + ", F1 " +
               fmt(*r.f1, 3) + ", MCC " + fmt(*r.mcc, 3);
    return v;
}

Verdict doping() {
    DopingConfig cfg;
    cfg.replications = 20;
    cfg.alpha = 0.001;
    cfg.frameworks = {FrameworkId::Uni, FrameworkId::MvtClayCop};
    const auto athlete = synthetic_athlete(cfg.scenario);
    const auto res = doping_case({}, athlete, cfg);
    const std::size_t point = 10;  // occasion 11, the off-ridge reading
    std::size_t hits = 0;
    for (std::size_t r = 0; r < cfg.replications; ++r)
        if (res.inside[1][r][point] == 0 && res.inside[0][r][point] == 1) ++hits;
    Verdict v;
    v.pass = res.failures.empty() && hits >= 18;
    v.detail = std::to_string(hits) + "/20 replications flag the off-ridge reading with MvtClayCop only (need 18)";
    return v;
}

Verdict determinism() {
    const auto root = fs::temp_directory_path() / "copadapt-acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    write_text_file(root / "config.json", R"({
  "replications": 3, "n": 300, "test_points": 2000,
  "mcmc": {"chains": 2, "chain_length": 4000, "burn_in": 2000, "thinning": 4},
  "copula_chain": {"burn_in": 100, "steps": 100},
  "pilot_length": 500, "posterior_rows": 200, "predictive_draws": 2000
})");
    std::string text[2];
    for (int k = 0; k < 2; ++k) {
        const auto out = root / ("run" + std::to_string(k));
        const std::string cfg = (root / "config.json").string(), dir = out.string();
        const char* argv[] = {"copadapt", "benchmark", "--config", cfg.c_str(), "--seed", "4242",
                              "--threads", "2",         "--out",    dir.c_str()};
        std::ostringstream so, se;
        if (cli::run(10, argv, so, se) != 0) return {false, "benchmark run failed: " + se.str()};
        text[k] = read_text_file(out / "benchmark.csv");
    }
    Verdict v;
    v.pass = !text[0].empty() && text[0] == text[1];
    v.detail = "benchmark.csv digests " + fnv1a_hex(text[0]) + " / " + fnv1a_hex(text[1]);
    fs::remove_all(root);
    return v;
}

}  // namespace

int main() {
    report(3, "HPR geometry", hpr_geometry);
    report(4, "conjugate oracle", conjugate_oracle);
    report(5, "copula suite", copula_suite);
    report(6, "metrics example", metrics_example);
    report(8, "benchmark determinism", determinism);
    report(1, "prior recovery", prior_recovery);

    BenchmarkResult bench;
    bool bench_ok = true;
    std::string bench_error;
    try {
        bench = run_table_benchmark();
    } catch (const std::exception& e) {
        bench_ok = false;
        bench_error = e.what();
    }
    auto bench_check = [&](Verdict (*f)(const BenchmarkResult&)) {
        return [&, f]() { return bench_ok ? f(bench) : Verdict{false, "benchmark failed: " + bench_error}; };
    };
    report(2, "(a) exact sample coverage", bench_check(exact_coverage));
    report(2, "(b) Uni miscoverage", bench_check(uni_miscoverage));
    report(2, "(c) MvtClayCop classification", bench_check(claycop_classification));
    report(2, "(d) FNR ordering", bench_check(fnr_ordering));
    if (bench_ok) {
        std::cout << "benchmark table (mean over replications):\n" << benchmark_to_csv(bench);
    }

    report(7, "doping off-ridge reading", doping);

    std::printf("%s: %d failing criteria\n", failures == 0 ? "ALL PASS" : "FAILURES", failures);
    return failures == 0 ? 0 : 1;
}
