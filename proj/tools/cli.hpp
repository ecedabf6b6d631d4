#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "copadapt/experiments.hpp"

namespace copadapt::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kValidation = 3, kNumerical = 4, kIo = 5 };

inline constexpr const char* kOutEnv = "COPADAPT_OUT";

// Fully resolved parameters of one run. Every field is serialised into the
// manifest, so a manifest can be fed back through --config.
struct RunConfig {
    std::string command;
    std::uint64_t seed = 20240607;
    unsigned threads = 1;
    std::vector<double> alphas{0.05, 0.01, 0.001};
    std::vector<FrameworkId> frameworks = all_frameworks();
    MetricsMode metrics_mode = MetricsMode::Standard;
    std::size_t n = 500;
    std::size_t replications = 100;
    std::size_t test_points = 10'000;
    std::size_t oracle_draws = 100'000;
    ScenarioParams scenario;
    PipelineConfig pipeline;
    std::string data;
    std::string athlete;
    std::string priors;
    std::string predictive;
    std::string base;
    double hgb_noise = 0.25;
    double offs_noise = 3.0;
    bool synthetic_athlete = false;
    std::string measure = "copula-np";
    std::size_t grid_steps = 60;
    bool persist = false;
};

RunConfig default_config(const std::string& command);
nlohmann::ordered_json to_json(const RunConfig& config);
// Applies a config document on top of `config`. Unknown keys throw
// ConfigError. A manifest document is accepted too (its "config" member is
// applied).
void apply_json(RunConfig& config, const nlohmann::json& doc);

// Full command-line entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace copadapt::cli
