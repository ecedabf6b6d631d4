#pragma once

#include <span>
#include <string>
#include <vector>

namespace copadapt {

// One sampling occasion for one athlete.
struct BiomarkerReading {
    std::string athlete_id;
    int occasion = 1;
    double hgb = 0.0;   // g/dL
    double offs = 0.0;  // OFF-score units
    std::vector<double> covariates;
};

// Throws DomainError on non-finite values and PreconditionError when an
// athlete's occasions are not strictly increasing in file order or rows
// disagree on the covariate count.
void validate(std::span<const BiomarkerReading> readings);

enum class Marker { Hgb, Offs };

// One biomarker's observations, in the layout the marginal samplers use.
struct MarkerData {
    std::vector<double> y;
    // Empty, or one row per observation.
    std::vector<std::vector<double>> covariates;
    // Dense athlete index per observation (0-based, first-seen order).
    std::vector<std::size_t> athlete;
    std::size_t num_athletes = 0;

    std::size_t size() const noexcept { return y.size(); }

    static MarkerData from_readings(std::span<const BiomarkerReading> readings, Marker marker);
    static MarkerData from_values(std::vector<double> y);
};

}  // namespace copadapt
