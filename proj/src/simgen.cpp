#include "copadapt/simgen.hpp"

#include <cmath>

#include "copadapt/errors.hpp"

namespace copadapt {

void validate(const ScenarioParams& params) {
    validate(params.joint());
}

std::vector<BiomarkerReading> generate_control(std::size_t n, const ScenarioParams& params, std::uint64_t seed) {
    if (n == 0) throw PreconditionError("generate_control: N must be >= 1");
    validate(params);
    const auto joint = params.joint();
    Rng rng(seed);
    std::vector<BiomarkerReading> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto p = joint.draw(rng);
        out[i].athlete_id = "c" + std::to_string(i + 1);
        out[i].occasion = 1;
        out[i].hgb = p[0];
        out[i].offs = p[1];
    }
    return out;
}

std::vector<BiomarkerReading> resample_with_noise(std::span<const BiomarkerReading> base, std::size_t n,
                                                  double hgb_noise_sd, double offs_noise_sd, std::uint64_t seed) {
    if (base.empty()) throw PreconditionError("resample_with_noise: base data set is empty");
    if (!(hgb_noise_sd >= 0.0) || !(offs_noise_sd >= 0.0))
        throw ParameterDomainError("resample_with_noise: noise sds must be nonnegative");
    Rng rng(seed);
    std::vector<BiomarkerReading> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(base.size())) % base.size();
        auto r = base[pick];
        r.athlete_id = "r" + std::to_string(i + 1);
        r.occasion = 1;
        const double eh = standard_normal(rng);
        const double eo = standard_normal(rng);
        r.hgb += hgb_noise_sd * eh;
        r.offs += offs_noise_sd * eo;
        out[i] = std::move(r);
    }
    return out;
}

BiomarkerReading reading_at_levels(const ScenarioParams& params, double p_hgb, double p_offs,
                                   const std::string& athlete_id, int occasion) {
    BiomarkerReading r;
    r.athlete_id = athlete_id;
    r.occasion = occasion;
    r.hgb = marginal_quantile(params.hgb, p_hgb);
    r.offs = marginal_quantile(params.offs, p_offs);
    return r;
}

std::vector<BiomarkerReading> synthetic_athlete(const ScenarioParams& params, const std::string& athlete_id) {
    // Marginal levels; the ridge points keep the two levels close, which is
    // where a positively dependent copula puts its mass.
    static const double levels[13][2] = {
        {0.9999, 0.9999}, {0.45, 0.50}, {0.60, 0.55}, {0.30, 0.35}, {0.70, 0.72}, {0.50, 0.40}, {0.80, 0.75},
        {0.55, 0.62}, {0.40, 0.30}, {0.65, 0.70}, {kOffRidgeHgbLevel, kOffRidgeOffsLevel}, {0.52, 0.48},
        {0.35, 0.42}};
    std::vector<BiomarkerReading> out;
    out.reserve(13);
    for (int j = 0; j < 13; ++j) out.push_back(reading_at_levels(params, levels[j][0], levels[j][1], athlete_id, j + 1));
    return out;
}

}  // namespace copadapt
