#include <sstream>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.hpp"
#include "copadapt/errors.hpp"
#include "copadapt/experiments.hpp"
#include "copadapt/io.hpp"

namespace py = pybind11;
using namespace copadapt;

namespace {

CopulaModel copula(const std::string& family, double theta) { return {parse_copula_family(family), theta}; }

std::vector<BiomarkerReading> to_readings(const std::vector<double>& hgb, const std::vector<double>& offs) {
    if (hgb.size() != offs.size()) throw ShapeError("hgb and offs must have the same length");
    std::vector<BiomarkerReading> r(hgb.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = {"c" + std::to_string(i + 1), 1, hgb[i], offs[i], {}};
    return r;
}

py::dict metrics_dict(const MetricsReport& m) {
    py::dict d;
    for (const auto& col : kMetricColumns) {
        const auto v = metric_value(m, col);
        d[py::str(col)] = v ? py::object(py::float_(*v)) : py::object(py::none());
    }
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Copula-based adaptive reference regions for paired biomarkers";
    m.attr("__version__") = kVersion;

    // Subclasses are caught by reference, so every library error maps here.
    py::register_exception<Error>(m, "CopadaptError", PyExc_ValueError);

    m.def("copula_cdf", [](const std::string& f, double theta, double u, double v) {
        return copula_cdf(copula(f, theta), u, v);
    }, py::arg("family"), py::arg("theta"), py::arg("u"), py::arg("v"));
    m.def("copula_pdf", [](const std::string& f, double theta, double u, double v) {
        return copula_pdf(copula(f, theta), u, v);
    }, py::arg("family"), py::arg("theta"), py::arg("u"), py::arg("v"));
    m.def("kendall_tau", [](const std::string& f, double theta) { return kendall_tau(copula(f, theta)); },
          py::arg("family"), py::arg("theta"));
    m.def("copula_sample", [](const std::string& f, double theta, std::size_t n, std::uint64_t seed) {
        const auto s = copula_sample(copula(f, theta), n, seed);
        std::vector<double> u(n), v(n);
        for (std::size_t i = 0; i < n; ++i) {
            u[i] = s[i].u;
            v[i] = s[i].v;
        }
        return py::make_tuple(u, v);
    }, py::arg("family"), py::arg("theta"), py::arg("n"), py::arg("seed") = 0);

    m.def("simulate_control", [](std::size_t n, std::uint64_t seed) {
        const auto r = generate_control(n, ScenarioParams{}, seed);
        std::vector<double> h, o;
        for (const auto& x : r) {
            h.push_back(x.hgb);
            o.push_back(x.offs);
        }
        return py::make_tuple(h, o);
    }, py::arg("n"), py::arg("seed") = 0, "Control-population readings as (hgb, offs) lists.");

    m.def("fit_prior", [](const std::vector<double>& hgb, const std::vector<double>& offs, const std::string& framework,
                          std::size_t chain_length, std::size_t posterior_rows, std::uint64_t seed) {
        const auto data = to_readings(hgb, offs);
        const auto spec = framework_spec(parse_framework(framework));
        IfmConfig cfg;
        cfg.priors = default_priors(data, spec.hgb_family, spec.offs_family, spec.offs_components, spec.copula);
        cfg.marginal_mcmc.chain_length = chain_length;
        cfg.marginal_mcmc.burn_in = chain_length / 2;
        cfg.marginal_mcmc.seed = seed;
        cfg.max_rows = posterior_rows;
        cfg.seed = derive_seed(seed, 1);
        const auto derived = derive_priors(bayesian_ifm(data, cfg));
        py::dict summary;
        for (const auto& s : derived.summary) summary[py::str(s.name)] = py::make_tuple(s.map, s.sd);
        return py::make_tuple(summary, prior_spec_to_json(derived.spec, derived.summary));
    }, py::arg("hgb"), py::arg("offs"), py::arg("framework") = "MvtClayCop", py::arg("chain_length") = 10'000,
       py::arg("posterior_rows") = 500, py::arg("seed") = 0,
       "Fit the historical posterior and derive priors. Returns (summary, prior_json).");

    m.def("prior_predictive", [](const std::string& prior_json, std::size_t draws, std::uint64_t seed) {
        const auto s = predictive_sample(prior_spec_from_json(prior_json), draws, seed);
        return py::make_tuple(s.hgb, s.offs);
    }, py::arg("prior_json"), py::arg("draws") = 10'000, py::arg("seed") = 0);

    m.def("hpr", [](const std::vector<double>& hgb, const std::vector<double>& offs, double alpha) {
        const auto g = make_copula_np_measure(hgb, offs);
        std::vector<Point2> pts(hgb.size());
        for (std::size_t i = 0; i < pts.size(); ++i) pts[i] = {hgb[i], offs[i]};
        const auto h = estimate_hpr(pts, g, alpha);
        py::dict d;
        d["threshold"] = h.threshold;
        d["inside"] = std::vector<bool>(h.inside.begin(), h.inside.end());
        d["sample_miscoverage"] = h.sample_miscoverage();
        return d;
    }, py::arg("hgb"), py::arg("offs"), py::arg("alpha") = 0.05,
       "Highest-predictive region of a sample under the copula-nonparametric measure.");

    m.def("classification_metrics", [](std::size_t tp, std::size_t fn, std::size_t fp, std::size_t tn) {
        ConfusionCounts c;
        c.tp = tp;
        c.fn = fn;
        c.fp = fp;
        c.tn = tn;
        return metrics_dict(classification_metrics(c));
    }, py::arg("tp"), py::arg("fn"), py::arg("fp"), py::arg("tn"));

    m.def("frameworks", [] {
        std::vector<std::string> out;
        for (auto f : all_frameworks()) out.push_back(to_string(f));
        return out;
    });

    m.def("run_cli", [](std::vector<std::string> args) {
        args.insert(args.begin(), "copadapt");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        int code;
        {
            py::gil_scoped_release release;
            code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
    }, py::arg("args"), "Run a command-line invocation in-process. Returns (exit_code, stdout, stderr).");
}
