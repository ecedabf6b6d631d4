#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "copadapt/joint.hpp"
#include "copadapt/readings.hpp"

namespace copadapt {

// Control-population law: Gaussian hgb, three-component OFF-score mixture
// and a survival Clayton copula.
struct ScenarioParams {
    MarginalModel hgb = MarginalModel::gaussian(15.77, 0.76);
    MarginalModel offs = MarginalModel::mixture({{0.24, 81.58, 2.97}, {0.49, 92.13, 3.28}, {0.27, 104.54, 5.29}});
    CopulaModel copula{CopulaFamily::SurvClayton, 1.81};

    JointModel joint() const { return {hgb, offs, copula}; }
};

void validate(const ScenarioParams& params);

// N single-occasion readings with ids c1..cN.
std::vector<BiomarkerReading> generate_control(std::size_t n, const ScenarioParams& params, std::uint64_t seed);

// Bootstrap rows from `base` and add independent Gaussian noise per marker.
std::vector<BiomarkerReading> resample_with_noise(std::span<const BiomarkerReading> base, std::size_t n,
                                                  double hgb_noise_sd, double offs_noise_sd, std::uint64_t seed);

// Reading at marginal probability levels (p_hgb, p_offs) of the scenario law.
BiomarkerReading reading_at_levels(const ScenarioParams& params, double p_hgb, double p_offs,
                                   const std::string& athlete_id, int occasion);

// Thirteen synthetic readings for one athlete. Occasions 1-10 and 12-13
// lie along the dependence ridge; occasion 11 sits inside both marginal
// 99.9% ranges but off the ridge (high hgb level, low OFF-score level),
// and occasion 1 is a far upper-tail point on both markers.
std::vector<BiomarkerReading> synthetic_athlete(const ScenarioParams& params, const std::string& athlete_id = "S1");

// Marginal levels used for the off-ridge occasion.
inline constexpr double kOffRidgeHgbLevel = 0.995;
inline constexpr double kOffRidgeOffsLevel = 0.02;

}  // namespace copadapt
