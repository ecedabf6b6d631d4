#include "copadapt/readings.hpp"

#include <cmath>
#include <map>

#include "copadapt/errors.hpp"

namespace copadapt {

void validate(std::span<const BiomarkerReading> readings) {
    std::map<std::string, int> last;
    const std::size_t p = readings.empty() ? 0 : readings.front().covariates.size();
    for (std::size_t i = 0; i < readings.size(); ++i) {
        const auto& r = readings[i];
        if (!std::isfinite(r.hgb) || !std::isfinite(r.offs))
            throw DomainError("reading " + std::to_string(i + 1) + " has a non-finite marker value");
        for (double x : r.covariates)
            if (!std::isfinite(x)) throw DomainError("reading " + std::to_string(i + 1) + " has a non-finite covariate");
        if (r.covariates.size() != p)
            throw PreconditionError("reading " + std::to_string(i + 1) + " has " + std::to_string(r.covariates.size()) +
                                    " covariates, expected " + std::to_string(p));
        auto [it, inserted] = last.try_emplace(r.athlete_id, r.occasion);
        if (!inserted) {
            if (r.occasion <= it->second)
                throw PreconditionError("occasions for athlete '" + r.athlete_id + "' are not strictly increasing");
            it->second = r.occasion;
        }
    }
}

MarkerData MarkerData::from_readings(std::span<const BiomarkerReading> readings, Marker marker) {
    MarkerData d;
    std::map<std::string, std::size_t> ids;
    d.y.reserve(readings.size());
    for (const auto& r : readings) {
        d.y.push_back(marker == Marker::Hgb ? r.hgb : r.offs);
        auto [it, inserted] = ids.try_emplace(r.athlete_id, ids.size());
        d.athlete.push_back(it->second);
        if (!r.covariates.empty()) d.covariates.push_back(r.covariates);
    }
    if (!d.covariates.empty() && d.covariates.size() != d.y.size())
        throw ShapeError("covariates must be given for every reading or for none");
    d.num_athletes = ids.size();
    return d;
}

MarkerData MarkerData::from_values(std::vector<double> y) {
    MarkerData d;
    d.athlete.assign(y.size(), 0);
    d.num_athletes = y.empty() ? 0 : 1;
    d.y = std::move(y);
    return d;
}

}  // namespace copadapt
