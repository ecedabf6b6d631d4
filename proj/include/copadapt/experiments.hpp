#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "copadapt/hpr.hpp"
#include "copadapt/inference.hpp"
#include "copadapt/metrics.hpp"
#include "copadapt/predictive.hpp"
#include "copadapt/simgen.hpp"

namespace copadapt {

enum class FrameworkId { Uni, HybGauss, HybClayCop, MvtGauss, MvtFrankCop, MvtClayCop };

std::string to_string(FrameworkId id);
FrameworkId parse_framework(std::string_view name);
const std::vector<FrameworkId>& all_frameworks();

struct FrameworkSpec {
    MarginalFamily hgb_family = MarginalFamily::Gaussian;
    MarginalFamily offs_family = MarginalFamily::GaussMixture;
    std::size_t offs_components = 3;
    CopulaFamily copula = CopulaFamily::SurvClayton;
    // 2D region from the copula-nonparametric measure; otherwise two 1D
    // regions combined with the OR rule.
    bool joint_region = true;
};

FrameworkSpec framework_spec(FrameworkId id);

// Settings shared by every framework fit: historical posterior, derived
// priors, prior predictive and region construction.
struct PipelineConfig {
    McmcConfig marginal_mcmc{2, 10'000, 5'000, 5, {}, 0, true, 0.3};
    CopulaChainConfig copula{200, 200};
    std::size_t pilot_length = 2'000;
    // Aligned rows kept for the copula stage (0 keeps all).
    std::size_t posterior_rows = 500;
    std::size_t predictive_draws = 10'000;
    DerivePriorsConfig derive;
    CopulaNpConfig np;
    unsigned threads = 1;
};

void validate(const PipelineConfig& config);

// Step-1 posteriors and copula stages are shared between frameworks that
// use the same marginal families (and copula family). Seeds are derived
// from the model structure, so results do not depend on which framework
// triggers a fit first.
class FitCache {
public:
    const MarginalPosterior& marginal(MarginalFamily family, std::size_t components, Marker marker,
                                      std::span<const BiomarkerReading> data, const PipelineConfig& config,
                                      std::uint64_t seed);
    const PosteriorDraws& joint(const FrameworkSpec& spec, std::span<const BiomarkerReading> data,
                                const PipelineConfig& config, std::uint64_t seed);

private:
    std::map<std::string, MarginalPosterior> marginals_;
    std::map<std::string, PosteriorDraws> joints_;
};

struct FittedFramework {
    FrameworkId id = FrameworkId::MvtClayCop;
    FrameworkSpec spec;
    DerivedPriors priors;
    PredictiveSample sample;
    // Joint frameworks: measure and its values on the predictive sample.
    std::optional<ConcentrationMeasure> measure;
    std::vector<double> sample_values;
    // Univariate frameworks: 1D KDE measures of the two predictive margins.
    std::optional<ConcentrationMeasure> hgb_measure;
    std::optional<ConcentrationMeasure> offs_measure;
};

// Historical fit, prior derivation and prior-predictive sample. `seed` is
// the replication seed.
FittedFramework fit_framework(FrameworkId id, std::span<const BiomarkerReading> historical,
                              const PipelineConfig& config, std::uint64_t seed, FitCache* cache = nullptr);

struct FrameworkRegion {
    FrameworkId id = FrameworkId::MvtClayCop;
    double alpha = 0.05;
    std::optional<HprEstimate> joint;
    std::optional<UnivariateRegion> hgb;
    std::optional<UnivariateRegion> offs;
    // Fraction of the framework's own predictive sample flagged.
    double sample_miscoverage = 0.0;
};

FrameworkRegion build_region(const FittedFramework& fit, double alpha);

// Measure values of arbitrary points under a joint framework (reusable
// across alphas).
std::vector<double> measure_values(const FittedFramework& fit, std::span<const Point2> points);

// Atypical flags for points. `values` must come from measure_values for
// joint frameworks and is ignored otherwise.
std::vector<std::uint8_t> flag_points(const FrameworkRegion& region, std::span<const Point2> points,
                                      std::span<const double> values);

// Fresh true-law points with the oracle truth at each alpha.
struct TestSet {
    std::vector<Point2> points;
    std::vector<double> alphas;
    std::vector<double> thresholds;                  // p_alpha per alpha
    std::vector<std::vector<std::uint8_t>> atypical;  // per alpha, per point
};

TestSet make_test_set(const ScenarioParams& truth, std::size_t n, std::span<const double> alphas,
                      std::size_t oracle_draws, std::uint64_t seed);

struct FrameworkOutcome {
    FrameworkId id = FrameworkId::MvtClayCop;
    double alpha = 0.05;
    ConfusionCounts counts;
    MetricsReport metrics;
    FrameworkRegion region;
};

// Fit one framework on the historical data and score it on the test set
// at every alpha of the test set.
std::vector<FrameworkOutcome> run_framework(FrameworkId id, std::span<const BiomarkerReading> historical,
                                            const TestSet& test, const PipelineConfig& config, std::uint64_t seed,
                                            MetricsMode mode = MetricsMode::Standard, FitCache* cache = nullptr);

struct BenchmarkConfig {
    std::size_t replications = 100;
    std::size_t n_historical = 500;
    std::vector<double> alphas{0.05, 0.01, 0.001};
    std::size_t test_points = 10'000;
    std::size_t oracle_draws = 100'000;
    std::uint64_t seed = 20240607;
    std::vector<FrameworkId> frameworks = all_frameworks();
    ScenarioParams scenario;
    MetricsMode metrics_mode = MetricsMode::Standard;
    PipelineConfig pipeline;
    // Replications run concurrently on this many threads.
    unsigned threads = 1;
};

void validate(const BenchmarkConfig& config);

struct ReplicationRecord {
    std::size_t replication = 0;
    FrameworkId id = FrameworkId::MvtClayCop;
    double alpha = 0.05;
    MetricsReport metrics;
};

struct ReplicationFailure {
    std::size_t replication = 0;
    std::string message;
};

struct AggregateCell {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t count = 0;
};

struct BenchmarkRow {
    FrameworkId id = FrameworkId::MvtClayCop;
    double alpha = 0.05;
    // kMetricColumns order, then true-law miscoverage.
    std::vector<AggregateCell> cells;
};

struct BenchmarkResult {
    std::vector<ReplicationRecord> records;
    std::vector<ReplicationFailure> failures;
    std::vector<BenchmarkRow> rows;
    std::size_t replications = 0;

    const BenchmarkRow& row(FrameworkId id, double alpha) const;
};

// Replication seeds are derived from the master seed; records are kept in
// replication order whatever the thread schedule. A replication that throws
// is excluded from the aggregates and listed in `failures`.
BenchmarkResult reproduce_benchmark(const BenchmarkConfig& config,
                                    const std::function<void(std::size_t)>& on_replication_done = {});

struct DopingConfig {
    std::size_t replications = 20;
    double alpha = 0.001;
    std::vector<FrameworkId> frameworks = all_frameworks();
    std::size_t n_historical = 500;
    ScenarioParams scenario;
    PipelineConfig pipeline;
    std::uint64_t seed = 20240607;
    unsigned threads = 1;
};

struct DopingResult {
    std::vector<FrameworkId> frameworks;
    std::vector<BiomarkerReading> readings;
    // inside[f][r][p]: point p inside framework f's region in replication r.
    std::vector<std::vector<std::vector<std::uint8_t>>> inside;
    std::vector<ReplicationFailure> failures;

    double inside_probability(std::size_t framework, std::size_t point) const;
    double inside_sd(std::size_t framework, std::size_t point) const;
};

// Prior-predictive regions per replication, scored on the athlete's
// readings. An empty `historical` regenerates control data from the
// scenario in every replication.
DopingResult doping_case(std::span<const BiomarkerReading> historical, std::span<const BiomarkerReading> athlete,
                         const DopingConfig& config);

}  // namespace copadapt
