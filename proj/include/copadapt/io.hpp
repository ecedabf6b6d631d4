#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "copadapt/experiments.hpp"
#include "copadapt/hpr.hpp"
#include "copadapt/inference.hpp"
#include "copadapt/metrics.hpp"
#include "copadapt/predictive.hpp"
#include "copadapt/readings.hpp"

namespace copadapt {

inline constexpr const char* kVersion = "0.1.0";

// Shortest decimal text that parses back to the same double.
std::string format_double(double x);
double parse_double(std::string_view text);

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view data);

std::string read_text_file(const std::filesystem::path& path);
// Creates parent directories as needed.
void write_text_file(const std::filesystem::path& path, std::string_view text);

// Readings: athlete_id,occasion,hgb,offs[,x1..xp]
std::vector<BiomarkerReading> parse_readings_csv(std::string_view text);
std::vector<BiomarkerReading> read_readings_csv(const std::filesystem::path& path);
std::string readings_to_csv(std::span<const BiomarkerReading> readings);

// Posterior draws: one row per draw, columns as in parameter_table().
// Random-intercept athlete effects are not persisted.
std::string posterior_to_csv(const PosteriorDraws& draws);
PosteriorDraws parse_posterior_csv(std::string_view text, CopulaFamily family = CopulaFamily::SurvClayton);

std::string prior_spec_to_json(const PriorSpec& spec, std::span<const ParameterSummary> summary = {});
PriorSpec prior_spec_from_json(std::string_view text);

// Predictive sample: hgb,offs plus a JSON sidecar with mode, seed and a
// digest of whatever the sample was drawn from.
std::string predictive_to_csv(const PredictiveSample& sample);
std::string predictive_sidecar_json(const PredictiveSample& sample, std::string_view source_digest);
PredictiveSample parse_predictive(std::string_view csv, std::string_view sidecar_json);

// HPR plot data: hgb,offs,value,inside for every sample point, plus a JSON
// header with alpha, threshold, measure kind and seed.
std::string hpr_to_csv(std::span<const Point2> points, const HprEstimate& hpr);
std::string hpr_header_json(const HprEstimate& hpr, std::uint64_t seed);
struct HprFile {
    std::vector<Point2> points;
    HprEstimate hpr;
    std::uint64_t seed = 0;
};
HprFile parse_hpr(std::string_view csv, std::string_view header_json);

// Measure values on a regular grid for contour plots: hgb,offs,value.
struct ContourGrid {
    std::vector<double> hgb;
    std::vector<double> offs;
    std::vector<double> values;  // row-major, hgb varies slowest
};
ContourGrid contour_grid(const ConcentrationMeasure& g, double hgb_lo, double hgb_hi, double offs_lo, double offs_hi,
                         std::size_t steps);
std::string contour_to_csv(const ContourGrid& grid);

std::string metrics_to_json(const MetricsReport& report, const ConfusionCounts& counts);
MetricsReport metrics_from_json(std::string_view text);
std::string metrics_csv_header();
std::string metrics_csv_row(const MetricsReport& report);
MetricsReport parse_metrics_csv_row(std::string_view row);

// Table layout: framework,alpha,miscoverage,fpr,fnr,accuracy,f1,mcc with
// "mean (sd)" cells at 4 decimals; NA when no replication produced a value.
std::string benchmark_to_csv(const BenchmarkResult& result);
std::string benchmark_to_json(const BenchmarkResult& result);
BenchmarkResult benchmark_from_json(std::string_view text);

// athlete_id,occasion,hgb,offs then one "probability (sd)" cell per framework.
std::string doping_to_csv(const DopingResult& result);
std::string doping_to_json(const DopingResult& result, double alpha);

struct ManifestEntry {
    std::string path;
    std::string digest;
};

// Everything needed to re-run a command: the resolved config document and
// the seed, plus digests of the emitted files.
struct Manifest {
    std::string command;
    std::string version = kVersion;
    std::string config_json;  // canonical JSON
    std::string config_digest;
    std::uint64_t seed = 0;
    std::vector<ManifestEntry> outputs;
};

std::string manifest_to_json(const Manifest& manifest);
Manifest manifest_from_json(std::string_view text);

}  // namespace copadapt
