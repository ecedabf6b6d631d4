#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace copadapt {

// Map between a constrained parameter and the real line on which the
// random walk moves. The log-Jacobian of the inverse map is added to the
// target automatically.
struct ParamTransform {
    enum class Kind { Identity, Log, Interval };
    Kind kind = Kind::Identity;
    double lower = 0.0;  // Log: x > lower.  Interval: lower < x < upper.
    double upper = 1.0;

    static ParamTransform identity() { return {}; }
    static ParamTransform positive(double lower = 0.0) { return {Kind::Log, lower, 0.0}; }
    static ParamTransform interval(double lower, double upper) { return {Kind::Interval, lower, upper}; }

    double to_free(double x) const;
    double from_free(double z) const;
    // log |dx/dz| at z.
    double log_jacobian(double z) const;
};

struct McmcConfig {
    std::size_t chains = 2;
    std::size_t chain_length = 50'000;
    std::size_t burn_in = 25'000;
    std::size_t thinning = 5;
    // Initial random-walk scale per coordinate, on the free scale. Empty
    // means 0.1 for every coordinate.
    std::vector<double> proposal_scales;
    std::uint64_t seed = 0;
    // Tune a global scale and the proposal covariance during burn-in.
    bool adapt = true;
    double target_acceptance = 0.3;

    std::size_t retained_per_chain() const;
    std::size_t retained() const { return chains * retained_per_chain(); }
};

// Throws ConfigError.
void validate(const McmcConfig& config);

struct McmcResult {
    std::size_t dim = 0;
    // Retained draws on the natural scale, chain after chain, row-major.
    std::vector<double> draws;
    std::vector<double> acceptance;  // per chain, post burn-in
    std::vector<double> final_scale;  // per chain, global multiplier after adaptation
    std::vector<std::string> warnings;

    std::size_t rows() const { return dim == 0 ? 0 : draws.size() / dim; }
    std::span<const double> row(std::size_t i) const { return {draws.data() + i * dim, dim}; }
    std::vector<double> column(std::size_t j) const;
    double mean_acceptance() const;
};

using LogTarget = std::function<double(std::span<const double>)>;

// Adaptive random-walk Metropolis-Hastings. `log_target` is evaluated on
// the natural scale; `transforms` is empty (all identity) or has one entry
// per coordinate. A NaN target aborts with NumericalError; an acceptance
// rate outside (0.05, 0.95) adds a warning to the result.
McmcResult rw_mh(const LogTarget& log_target, std::span<const double> init, const McmcConfig& config,
                 std::span<const ParamTransform> transforms = {});

}  // namespace copadapt
