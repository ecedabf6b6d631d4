#include "copadapt/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "copadapt/errors.hpp"

namespace copadapt {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kReadingsSchema = "expected CSV header: athlete_id,occasion,hgb,offs[,x1,...,xp]";

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        auto line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) out.push_back(line);
        pos = end + 1;
    }
    return out;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const auto end = line.find(',', pos);
        if (end == std::string_view::npos) {
            out.push_back(line.substr(pos));
            return out;
        }
        out.push_back(line.substr(pos, end - pos));
        pos = end + 1;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

// Skips a UTF-8 byte-order mark.
std::string_view strip_bom(std::string_view text) {
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
    return text;
}

Json parse_json(std::string_view text, const char* what) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const Json::exception& e) {
        throw ConfigError(std::string(what) + ": invalid JSON (" + e.what() + ")");
    }
}

template <class T>
T get_field(const Json& j, const char* key, const char* what) {
    if (!j.contains(key)) throw ConfigError(std::string(what) + ": missing key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string(what) + ": bad value for '" + key + "' (" + e.what() + ")");
    }
}

Json optional_json(const std::optional<double>& v) {
    return v ? Json(*v) : Json(nullptr);
}

std::optional<double> optional_from(const Json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

Json prior_to_json(const Prior& prior) {
    Json j;
    j["kind"] = prior_kind(prior);
    std::visit(
        [&](const auto& p) {
            using P = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<P, NormalPrior>) {
                j["mean"] = p.mean;
                j["sd"] = p.sd;
                if (std::isfinite(p.lower)) j["lower"] = p.lower;
                if (std::isfinite(p.upper)) j["upper"] = p.upper;
            } else if constexpr (std::is_same_v<P, HalfTPrior>) {
                j["df"] = p.df;
                j["location"] = p.location;
                j["scale"] = p.scale;
            } else if constexpr (std::is_same_v<P, DirichletPrior>) {
                j["concentration"] = p.concentration;
            } else if constexpr (std::is_same_v<P, LogNormalPrior>) {
                j["logmean"] = p.logmean;
                j["logsd"] = p.logsd;
            } else {
                j["value"] = p.value;
            }
        },
        prior);
    return j;
}

Prior prior_from_json(const Json& j) {
    constexpr const char* what = "prior";
    const auto kind = get_field<std::string>(j, "kind", what);
    if (kind == "normal") {
        NormalPrior p;
        p.mean = get_field<double>(j, "mean", what);
        p.sd = get_field<double>(j, "sd", what);
        if (j.contains("lower")) p.lower = get_field<double>(j, "lower", what);
        if (j.contains("upper")) p.upper = get_field<double>(j, "upper", what);
        return p;
    }
    if (kind == "half-t")
        return HalfTPrior{get_field<double>(j, "df", what), get_field<double>(j, "location", what),
                          get_field<double>(j, "scale", what)};
    if (kind == "dirichlet") return DirichletPrior{get_field<std::vector<double>>(j, "concentration", what)};
    if (kind == "lognormal") return LogNormalPrior{get_field<double>(j, "logmean", what), get_field<double>(j, "logsd", what)};
    if (kind == "point-mass") return PointMassPrior{get_field<double>(j, "value", what)};
    throw ConfigError("prior: unknown kind '" + kind + "'");
}

Json marginal_prior_to_json(const MarginalPrior& p) {
    Json j;
    j["family"] = to_string(p.family);
    j["locations"] = Json::array();
    for (const auto& q : p.locations) j["locations"].push_back(prior_to_json(q));
    j["scales"] = Json::array();
    for (const auto& q : p.scales) j["scales"].push_back(prior_to_json(q));
    if (p.weights) j["weights"] = prior_to_json(*p.weights);
    if (!p.fixed_weights.empty()) j["fixed_weights"] = p.fixed_weights;
    if (p.intercept_variance) j["intercept_variance"] = prior_to_json(*p.intercept_variance);
    return j;
}

MarginalPrior marginal_prior_from_json(const Json& j) {
    MarginalPrior p;
    try {
        p.family = parse_marginal_family(get_field<std::string>(j, "family", "marginal prior"));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    for (const auto& q : j.at("locations")) p.locations.push_back(prior_from_json(q));
    for (const auto& q : j.at("scales")) p.scales.push_back(prior_from_json(q));
    if (j.contains("weights")) {
        auto w = prior_from_json(j.at("weights"));
        if (!std::holds_alternative<DirichletPrior>(w)) throw ConfigError("weights prior must be dirichlet");
        p.weights = std::get<DirichletPrior>(w);
    }
    if (j.contains("fixed_weights")) p.fixed_weights = j.at("fixed_weights").get<std::vector<double>>();
    if (j.contains("intercept_variance")) p.intercept_variance = prior_from_json(j.at("intercept_variance"));
    return p;
}

// Column index by name, or npos.
std::size_t column_of(const std::vector<std::string>& header, const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? std::string::npos : static_cast<std::size_t>(it - header.begin());
}

std::vector<std::vector<double>> parse_numeric_table(std::string_view text, std::vector<std::string>& header,
                                                     const char* what) {
    const auto lines = split_lines(strip_bom(text));
    if (lines.empty()) throw ShapeError(std::string(what) + ": empty file");
    for (auto f : split_fields(lines[0])) header.emplace_back(trim(f));
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto fields = split_fields(lines[i]);
        if (fields.size() != header.size())
            throw ShapeError(std::string(what) + ": line " + std::to_string(i + 1) + " has " +
                             std::to_string(fields.size()) + " fields, header has " + std::to_string(header.size()));
        std::vector<double> row;
        for (auto f : fields) row.push_back(parse_double(trim(f)));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string cell_text(const AggregateCell& c) {
    if (c.count == 0) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f (%.4f)", c.mean, c.sd);
    return buf;
}

std::string fixed(double x, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, x);
    return buf;
}

Json cell_json(const AggregateCell& c) {
    return Json{{"mean", c.mean}, {"sd", c.sd}, {"count", c.count}};
}

}  // namespace

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text) {
    text = trim(text);
    if (text == "nan" || text == "NaN") return std::numeric_limits<double>::quiet_NaN();
    if (text == "inf") return std::numeric_limits<double>::infinity();
    if (text == "-inf") return -std::numeric_limits<double>::infinity();
    if (!text.empty() && text.front() == '+') text.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw DomainError("not a number: '" + std::string(text) + "'");
    return v;
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write to '" + path.string() + "' failed");
}

std::vector<BiomarkerReading> parse_readings_csv(std::string_view text) {
    const auto lines = split_lines(strip_bom(text));
    if (lines.empty()) throw ShapeError(std::string("readings: empty input; ") + kReadingsSchema);
    const auto header = split_fields(lines[0]);
    static const char* required[] = {"athlete_id", "occasion", "hgb", "offs"};
    if (header.size() < 4) throw ShapeError(std::string("readings: header too short; ") + kReadingsSchema);
    for (std::size_t i = 0; i < 4; ++i)
        if (trim(header[i]) != required[i])
            throw ShapeError("readings: column " + std::to_string(i + 1) + " is '" + std::string(header[i]) +
                             "', expected '" + required[i] + "'; " + kReadingsSchema);
    for (std::size_t i = 4; i < header.size(); ++i)
        if (trim(header[i]) != "x" + std::to_string(i - 3))
            throw ShapeError("readings: covariate column " + std::to_string(i + 1) + " must be named x" +
                             std::to_string(i - 3) + "; " + kReadingsSchema);
    std::vector<BiomarkerReading> out;
    for (std::size_t l = 1; l < lines.size(); ++l) {
        const auto f = split_fields(lines[l]);
        if (f.size() != header.size())
            throw ShapeError("readings: line " + std::to_string(l + 1) + " has " + std::to_string(f.size()) +
                             " fields, expected " + std::to_string(header.size()));
        BiomarkerReading r;
        r.athlete_id = std::string(trim(f[0]));
        if (r.athlete_id.empty()) throw ShapeError("readings: empty athlete_id on line " + std::to_string(l + 1));
        const auto occ = trim(f[1]);
        const auto res = std::from_chars(occ.data(), occ.data() + occ.size(), r.occasion);
        if (res.ec != std::errc() || res.ptr != occ.data() + occ.size())
            throw DomainError("readings: bad occasion '" + std::string(occ) + "' on line " + std::to_string(l + 1));
        r.hgb = parse_double(f[2]);
        r.offs = parse_double(f[3]);
        for (std::size_t i = 4; i < f.size(); ++i) r.covariates.push_back(parse_double(f[i]));
        out.push_back(std::move(r));
    }
    if (out.empty()) throw ShapeError("readings: no data rows");
    validate(out);
    return out;
}

std::vector<BiomarkerReading> read_readings_csv(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw IoError("readings file '" + path.string() + "' not found; " + kReadingsSchema);
    return parse_readings_csv(read_text_file(path));
}

std::string readings_to_csv(std::span<const BiomarkerReading> readings) {
    std::string out = "athlete_id,occasion,hgb,offs";
    const std::size_t p = readings.empty() ? 0 : readings.front().covariates.size();
    for (std::size_t i = 0; i < p; ++i) out += ",x" + std::to_string(i + 1);
    out += '\n';
    for (const auto& r : readings) {
        if (r.covariates.size() != p) throw ShapeError("readings: rows disagree on covariate count");
        if (r.athlete_id.find_first_of(",\n\r") != std::string::npos)
            throw DomainError("readings: athlete_id may not contain commas or newlines");
        out += r.athlete_id + ',' + std::to_string(r.occasion) + ',' + format_double(r.hgb) + ',' +
               format_double(r.offs);
        for (double x : r.covariates) out += ',' + format_double(x);
        out += '\n';
    }
    return out;
}

std::string posterior_to_csv(const PosteriorDraws& draws) {
    const auto t = parameter_table(draws);
    std::string out;
    for (std::size_t j = 0; j < t.names.size(); ++j) out += (j ? "," : "") + t.names[j];
    out += '\n';
    for (std::size_t m = 0; m < draws.size(); ++m) {
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            if (j) out += ',';
            out += format_double(t.columns[j][m]);
        }
        out += '\n';
    }
    return out;
}

PosteriorDraws parse_posterior_csv(std::string_view text, CopulaFamily family) {
    std::vector<std::string> header;
    const auto rows = parse_numeric_table(text, header, "posterior draws");
    auto marker = [&](const std::string& tag, std::vector<MarginalModel>& out) {
        std::vector<std::size_t> beta;
        for (std::size_t j = 1;; ++j) {
            const auto c = column_of(header, "beta_" + tag + "_" + std::to_string(j));
            if (c == std::string::npos) break;
            beta.push_back(c);
        }
        if (!beta.empty()) {
            const auto cs = column_of(header, "sigma_" + tag);
            if (cs == std::string::npos) throw ShapeError("posterior draws: missing sigma_" + tag);
            for (const auto& row : rows) {
                std::vector<double> b;
                for (auto c : beta) b.push_back(row[c]);
                out.push_back(MarginalModel::random_intercept(std::move(b), row[cs]));
            }
            return;
        }
        if (auto cm = column_of(header, "mu_" + tag); cm != std::string::npos) {
            const auto cs = column_of(header, "sigma_" + tag);
            if (cs == std::string::npos) throw ShapeError("posterior draws: missing sigma_" + tag);
            for (const auto& row : rows) out.push_back(MarginalModel::gaussian(row[cm], row[cs]));
            return;
        }
        std::vector<std::size_t> mu, sd, w;
        for (std::size_t j = 1;; ++j) {
            const auto s = "_" + std::to_string(j);
            const auto c = column_of(header, "mu_" + tag + s);
            if (c == std::string::npos) break;
            mu.push_back(c);
            sd.push_back(column_of(header, "sigma_" + tag + s));
            w.push_back(column_of(header, "w_" + tag + s));
            if (sd.back() == std::string::npos || w.back() == std::string::npos)
                throw ShapeError("posterior draws: incomplete component " + std::to_string(j) + " for " + tag);
        }
        if (mu.empty()) throw ShapeError("posterior draws: no parameter columns for " + tag);
        for (const auto& row : rows) {
            std::vector<MixtureComponent> comp;
            for (std::size_t k = 0; k < mu.size(); ++k) comp.push_back({row[w[k]], row[mu[k]], row[sd[k]]});
            out.push_back(MarginalModel::mixture(std::move(comp)));
        }
    };
    PosteriorDraws d;
    d.copula_family = family;
    marker("hgb", d.hgb);
    marker("offs", d.offs);
    const auto ct = column_of(header, "theta_cop");
    if (ct == std::string::npos) throw ShapeError("posterior draws: missing theta_cop column");
    for (const auto& row : rows) d.theta.push_back(row[ct]);
    validate(d);
    return d;
}

std::string prior_spec_to_json(const PriorSpec& spec, std::span<const ParameterSummary> summary) {
    Json j;
    j["hgb"] = marginal_prior_to_json(spec.hgb);
    j["offs"] = marginal_prior_to_json(spec.offs);
    j["copula"] = Json{{"family", to_string(spec.copula_family)}, {"prior", prior_to_json(spec.copula)}};
    if (!summary.empty()) {
        j["summary"] = Json::array();
        for (const auto& s : summary) j["summary"].push_back(Json{{"name", s.name}, {"map", s.map}, {"sd", s.sd}});
    }
    return j.dump(2) + "\n";
}

PriorSpec prior_spec_from_json(std::string_view text) {
    const auto j = parse_json(text, "prior spec");
    PriorSpec s;
    try {
        s.hgb = marginal_prior_from_json(j.at("hgb"));
        s.offs = marginal_prior_from_json(j.at("offs"));
        const auto& c = j.at("copula");
        s.copula_family = parse_copula_family(c.at("family").get<std::string>());
        s.copula = prior_from_json(c.at("prior"));
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("prior spec: ") + e.what());
    }
    validate(s);
    return s;
}

std::string predictive_to_csv(const PredictiveSample& sample) {
    std::string out = "hgb,offs\n";
    for (std::size_t i = 0; i < sample.size(); ++i)
        out += format_double(sample.hgb[i]) + ',' + format_double(sample.offs[i]) + '\n';
    return out;
}

std::string predictive_sidecar_json(const PredictiveSample& sample, std::string_view source_digest) {
    Json j;
    j["mode"] = to_string(sample.mode);
    j["seed"] = sample.seed;
    j["draws"] = sample.size();
    j["athlete_id"] = sample.athlete_id;
    j["resampled"] = sample.resampled;
    j["source_digest"] = std::string(source_digest);
    return j.dump(2) + "\n";
}

PredictiveSample parse_predictive(std::string_view csv, std::string_view sidecar_json) {
    std::vector<std::string> header;
    const auto rows = parse_numeric_table(csv, header, "predictive sample");
    if (header != std::vector<std::string>{"hgb", "offs"}) throw ShapeError("predictive sample: header must be hgb,offs");
    const auto j = parse_json(sidecar_json, "predictive sidecar");
    PredictiveSample s;
    s.mode = parse_predictive_mode(get_field<std::string>(j, "mode", "predictive sidecar"));
    s.seed = get_field<std::uint64_t>(j, "seed", "predictive sidecar");
    s.athlete_id = get_field<std::string>(j, "athlete_id", "predictive sidecar");
    s.resampled = get_field<bool>(j, "resampled", "predictive sidecar");
    for (const auto& r : rows) {
        s.hgb.push_back(r[0]);
        s.offs.push_back(r[1]);
    }
    if (get_field<std::size_t>(j, "draws", "predictive sidecar") != s.size())
        throw ShapeError("predictive sample: sidecar draw count disagrees with the CSV");
    return s;
}

std::string hpr_to_csv(std::span<const Point2> points, const HprEstimate& hpr) {
    if (points.size() != hpr.size()) throw ShapeError("hpr export: one point per measure value required");
    std::string out = "hgb,offs,value,inside\n";
    for (std::size_t i = 0; i < points.size(); ++i)
        out += format_double(points[i][0]) + ',' + format_double(points[i][1]) + ',' + format_double(hpr.values[i]) +
               ',' + (hpr.inside[i] ? "1" : "0") + '\n';
    return out;
}

std::string hpr_header_json(const HprEstimate& hpr, std::uint64_t seed) {
    Json j;
    j["alpha"] = hpr.alpha;
    j["threshold"] = hpr.threshold;
    j["measure"] = to_string(hpr.kind);
    j["dim"] = hpr.dim;
    j["seed"] = seed;
    j["points"] = hpr.size();
    j["inside"] = hpr.inside_count();
    return j.dump(2) + "\n";
}

HprFile parse_hpr(std::string_view csv, std::string_view header_json) {
    std::vector<std::string> header;
    const auto rows = parse_numeric_table(csv, header, "hpr export");
    if (header != std::vector<std::string>{"hgb", "offs", "value", "inside"})
        throw ShapeError("hpr export: header must be hgb,offs,value,inside");
    const auto j = parse_json(header_json, "hpr header");
    HprFile f;
    f.seed = get_field<std::uint64_t>(j, "seed", "hpr header");
    f.hpr.alpha = get_field<double>(j, "alpha", "hpr header");
    f.hpr.threshold = get_field<double>(j, "threshold", "hpr header");
    f.hpr.dim = get_field<std::size_t>(j, "dim", "hpr header");
    const auto kind = get_field<std::string>(j, "measure", "hpr header");
    bool known = false;
    for (auto k : {MeasureKind::TrueDensity, MeasureKind::CopulaNonparametric, MeasureKind::KernelDensity})
        if (to_string(k) == kind) {
            f.hpr.kind = k;
            known = true;
        }
    if (!known) throw ConfigError("hpr header: unknown measure '" + kind + "'");
    for (const auto& r : rows) {
        f.points.push_back({r[0], r[1]});
        f.hpr.values.push_back(r[2]);
        f.hpr.inside.push_back(r[3] != 0.0 ? 1 : 0);
    }
    return f;
}

ContourGrid contour_grid(const ConcentrationMeasure& g, double hgb_lo, double hgb_hi, double offs_lo, double offs_hi,
                         std::size_t steps) {
    if (steps < 2) throw PreconditionError("contour grid needs at least 2 steps per axis");
    if (!(hgb_hi > hgb_lo) || !(offs_hi > offs_lo)) throw PreconditionError("contour grid: empty range");
    ContourGrid c;
    for (std::size_t i = 0; i < steps; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(steps - 1);
        c.hgb.push_back(hgb_lo + t * (hgb_hi - hgb_lo));
        c.offs.push_back(offs_lo + t * (offs_hi - offs_lo));
    }
    for (double h : c.hgb)
        for (double o : c.offs) c.values.push_back(g(h, o));
    return c;
}

std::string contour_to_csv(const ContourGrid& grid) {
    std::string out = "hgb,offs,value\n";
    std::size_t k = 0;
    for (double h : grid.hgb)
        for (double o : grid.offs) out += format_double(h) + ',' + format_double(o) + ',' + format_double(grid.values[k++]) + '\n';
    return out;
}

std::string metrics_to_json(const MetricsReport& r, const ConfusionCounts& c) {
    Json j;
    for (const auto& col : kMetricColumns) j[col] = optional_json(metric_value(r, col));
    j["miscoverage_true_law"] = optional_json(r.miscoverage_true_law);
    j["counts"] = Json{{"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}, {"mode", to_string(c.mode)}};
    return j.dump(2) + "\n";
}

MetricsReport metrics_from_json(std::string_view text) {
    const auto j = parse_json(text, "metrics");
    MetricsReport r;
    r.miscoverage = optional_from(j, "miscoverage");
    r.miscoverage_true_law = optional_from(j, "miscoverage_true_law");
    r.fpr = optional_from(j, "fpr");
    r.fnr = optional_from(j, "fnr");
    r.accuracy = optional_from(j, "accuracy");
    r.f1 = optional_from(j, "f1");
    r.mcc = optional_from(j, "mcc");
    return r;
}

std::string metrics_csv_header() {
    std::string out;
    for (std::size_t i = 0; i < kMetricColumns.size(); ++i) out += (i ? "," : "") + kMetricColumns[i];
    return out;
}

std::string metrics_csv_row(const MetricsReport& r) {
    std::string out;
    for (std::size_t i = 0; i < kMetricColumns.size(); ++i) {
        if (i) out += ',';
        const auto v = metric_value(r, kMetricColumns[i]);
        out += v ? format_double(*v) : "NA";
    }
    return out;
}

MetricsReport parse_metrics_csv_row(std::string_view row) {
    const auto f = split_fields(trim(row));
    if (f.size() != kMetricColumns.size()) throw ShapeError("metrics row: expected 6 fields");
    auto get = [&](std::size_t i) -> std::optional<double> {
        if (trim(f[i]) == "NA") return std::nullopt;
        return parse_double(f[i]);
    };
    MetricsReport r;
    r.miscoverage = get(0);
    r.fpr = get(1);
    r.fnr = get(2);
    r.accuracy = get(3);
    r.f1 = get(4);
    r.mcc = get(5);
    return r;
}

std::string benchmark_to_csv(const BenchmarkResult& result) {
    std::string out = "framework,alpha," + metrics_csv_header() + "\n";
    for (const auto& row : result.rows) {
        out += to_string(row.id) + ',' + format_double(row.alpha);
        for (std::size_t i = 0; i < kMetricColumns.size(); ++i) out += ',' + cell_text(row.cells.at(i));
        out += '\n';
    }
    return out;
}

std::string benchmark_to_json(const BenchmarkResult& result) {
    Json j;
    j["replications"] = result.replications;
    j["failed_replications"] = result.failures.size();
    j["failures"] = Json::array();
    for (const auto& f : result.failures) j["failures"].push_back(Json{{"replication", f.replication}, {"message", f.message}});
    auto columns = kMetricColumns;
    columns.push_back("miscoverage_true_law");
    j["rows"] = Json::array();
    for (const auto& row : result.rows) {
        Json r{{"framework", to_string(row.id)}, {"alpha", row.alpha}};
        for (std::size_t i = 0; i < columns.size(); ++i) r[columns[i]] = cell_json(row.cells.at(i));
        j["rows"].push_back(std::move(r));
    }
    j["records"] = Json::array();
    for (const auto& rec : result.records) {
        Json r{{"replication", rec.replication}, {"framework", to_string(rec.id)}, {"alpha", rec.alpha}};
        for (const auto& col : columns) r[col] = optional_json(metric_value(rec.metrics, col));
        j["records"].push_back(std::move(r));
    }
    return j.dump(2) + "\n";
}

BenchmarkResult benchmark_from_json(std::string_view text) {
    const auto j = parse_json(text, "benchmark");
    BenchmarkResult res;
    auto columns = kMetricColumns;
    columns.push_back("miscoverage_true_law");
    try {
        res.replications = j.at("replications").get<std::size_t>();
        for (const auto& f : j.at("failures"))
            res.failures.push_back({f.at("replication").get<std::size_t>(), f.at("message").get<std::string>()});
        for (const auto& r : j.at("rows")) {
            BenchmarkRow row;
            row.id = parse_framework(r.at("framework").get<std::string>());
            row.alpha = r.at("alpha").get<double>();
            for (const auto& col : columns) {
                const auto& c = r.at(col);
                row.cells.push_back({c.at("mean").get<double>(), c.at("sd").get<double>(), c.at("count").get<std::size_t>()});
            }
            res.rows.push_back(std::move(row));
        }
        for (const auto& r : j.at("records")) {
            ReplicationRecord rec;
            rec.replication = r.at("replication").get<std::size_t>();
            rec.id = parse_framework(r.at("framework").get<std::string>());
            rec.alpha = r.at("alpha").get<double>();
            rec.metrics.miscoverage = optional_from(r, "miscoverage");
            rec.metrics.fpr = optional_from(r, "fpr");
            rec.metrics.fnr = optional_from(r, "fnr");
            rec.metrics.accuracy = optional_from(r, "accuracy");
            rec.metrics.f1 = optional_from(r, "f1");
            rec.metrics.mcc = optional_from(r, "mcc");
            rec.metrics.miscoverage_true_law = optional_from(r, "miscoverage_true_law");
            res.records.push_back(std::move(rec));
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("benchmark: ") + e.what());
    }
    return res;
}

std::string doping_to_csv(const DopingResult& result) {
    std::string out = "athlete_id,occasion,hgb,offs";
    for (auto id : result.frameworks) out += ',' + to_string(id);
    out += '\n';
    const bool any = !result.inside.empty() && !result.inside.front().empty();
    for (std::size_t p = 0; p < result.readings.size(); ++p) {
        const auto& r = result.readings[p];
        out += r.athlete_id + ',' + std::to_string(r.occasion) + ',' + format_double(r.hgb) + ',' + format_double(r.offs);
        for (std::size_t f = 0; f < result.frameworks.size(); ++f)
            out += ',' + (any ? fixed(result.inside_probability(f, p), 3) + " (" + fixed(result.inside_sd(f, p), 3) + ")"
                              : std::string("NA"));
        out += '\n';
    }
    return out;
}

std::string doping_to_json(const DopingResult& result, double alpha) {
    Json j;
    j["alpha"] = alpha;
    j["replications"] = result.inside.empty() ? 0 : result.inside.front().size();
    j["failures"] = Json::array();
    for (const auto& f : result.failures) j["failures"].push_back(Json{{"replication", f.replication}, {"message", f.message}});
    j["points"] = Json::array();
    const bool any = !result.inside.empty() && !result.inside.front().empty();
    for (std::size_t p = 0; p < result.readings.size(); ++p) {
        const auto& r = result.readings[p];
        Json pt{{"athlete_id", r.athlete_id}, {"occasion", r.occasion}, {"hgb", r.hgb}, {"offs", r.offs}};
        for (std::size_t f = 0; f < result.frameworks.size(); ++f) {
            if (!any) continue;
            pt["inside"][to_string(result.frameworks[f])] =
                Json{{"probability", result.inside_probability(f, p)}, {"sd", result.inside_sd(f, p)}};
        }
        j["points"].push_back(std::move(pt));
    }
    return j.dump(2) + "\n";
}

std::string manifest_to_json(const Manifest& m) {
    Json j;
    j["command"] = m.command;
    j["version"] = m.version;
    j["seed"] = m.seed;
    j["config_digest"] = m.config_digest;
    j["config"] = parse_json(m.config_json.empty() ? "{}" : m.config_json, "manifest config");
    j["outputs"] = Json::array();
    for (const auto& o : m.outputs) j["outputs"].push_back(Json{{"path", o.path}, {"digest", o.digest}});
    return j.dump(2) + "\n";
}

Manifest manifest_from_json(std::string_view text) {
    const auto j = parse_json(text, "manifest");
    Manifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.version = j.at("version").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.config_digest = j.at("config_digest").get<std::string>();
        m.config_json = j.at("config").dump();
        for (const auto& o : j.at("outputs"))
            m.outputs.push_back({o.at("path").get<std::string>(), o.at("digest").get<std::string>()});
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("manifest: ") + e.what());
    }
    return m;
}

}  // namespace copadapt
